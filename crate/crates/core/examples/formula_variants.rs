//! The three representation kernels on a permutable and a non-permutable system.

use discrete_delay::random::{self, random_permutable_system, random_system};
use discrete_delay::solver::solve_nonhomogeneous_rep_with;
use discrete_delay::{compare, solve_recursion, DelaySystem, Formula};

fn report(label: &str, system: &DelaySystem) -> discrete_delay::Result<()> {
    let truth = solve_recursion(system, 30)?;
    for formula in Formula::ALL {
        let x = solve_nonhomogeneous_rep_with(system, 30, formula)?;
        let r = compare(&x, &truth, 1e-9)?;
        println!(
            "{label:<15} {:<10} max rel err {:.2e}",
            formula.name(),
            r.max_rel_err
        );
    }
    Ok(())
}

fn main() -> discrete_delay::Result<()> {
    let mut rng = random::seeded(4);
    report("permutable", &random_permutable_system(&mut rng, 3, 2))?;
    report("non-commuting", &random_system(&mut rng, 3, 2))?;
    Ok(())
}
