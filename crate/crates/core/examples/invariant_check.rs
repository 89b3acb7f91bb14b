//! The invariant suite on a handful of random systems.

use discrete_delay::check::{check_random, CheckConfig};

fn main() -> discrete_delay::Result<()> {
    let cfg = CheckConfig {
        trials: 5,
        seed: 9,
        ..CheckConfig::default()
    };
    let report = check_random(&cfg)?;
    print!("{}", report.render());
    println!("all pass: {}", report.all_pass());
    Ok(())
}
