//! Load a system JSON file, solve it and write the trajectory CSV to stdout.
//!
//! cargo run --example system_file_to_csv -- data/noncommuting.json 20

use std::io;

use discrete_delay::cli::load_system;
use discrete_delay::csv_io::write_trajectory;
use discrete_delay::{solve_nonhomogeneous_rep, ValidationOptions};

fn main() -> discrete_delay::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/noncommuting.json").into());
    let k_max = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let system = load_system(path.as_ref(), ValidationOptions::default())?;
    let x = solve_nonhomogeneous_rep(&system, k_max)?;
    write_trajectory(io::stdout().lock(), &x)
}
