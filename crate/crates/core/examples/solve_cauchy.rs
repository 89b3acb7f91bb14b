//! Solve the initial value problem by the representation and by stepping.

use discrete_delay::random::{self, random_system};
use discrete_delay::{compare, solve_nonhomogeneous_rep, solve_recursion};

fn main() -> discrete_delay::Result<()> {
    let system = random_system(&mut random::seeded(2), 2, 3);
    let k_max = 60;
    let rep = solve_nonhomogeneous_rep(&system, k_max)?;
    let truth = solve_recursion(&system, k_max)?;

    println!("k    representation                 recursion");
    for k in (-3..=k_max as i64).step_by(7) {
        let (a, b) = (rep.at(k), truth.at(k));
        println!(
            "{k:<4} [{:>12.6}, {:>12.6}]  [{:>12.6}, {:>12.6}]",
            a[0], a[1], b[0], b[1]
        );
    }
    let report = compare(&rep, &truth, 1e-9)?;
    println!(
        "max abs err {:.2e}, max rel err {:.2e}, pass at 1e-9: {}",
        report.max_abs_err, report.max_rel_err, report.pass
    );
    Ok(())
}
