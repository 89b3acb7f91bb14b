//! Fundamental matrix of a system with non-commuting, time-varying delay matrices.

use discrete_delay::fundamental::FundamentalBuilder;
use discrete_delay::random::{self, random_system};
use discrete_delay::{linalg, phi_oracle};

fn main() -> discrete_delay::Result<()> {
    let system = random_system(&mut random::seeded(7), 3, 2);
    let k_max = 40;
    let builder = FundamentalBuilder::new(&system, k_max)?;
    let phi = builder.phi()?;
    let oracle = phi_oracle(&system, k_max)?;

    for k in [-3i64, -2, 0, 1, 5, 20, 40] {
        println!(
            "k = {k:>3}: max|Φ(k)| = {:.4e}, vs stepped recursion {:.2e}",
            phi.at(k).amax(),
            linalg::rel_diff(phi.at(k), oracle.at(k), &[])
        );
    }
    println!(
        "residual of Φ(k+1) = AΦ(k) + B_k Φ(k-m): {:.2e}",
        phi.residual(system.a(), system.b(), 0)
    );
    println!(
        "residual with D_k in place of B_k:         {:.2e}",
        phi.residual(system.a(), builder.d_sequence(), 0)
    );

    let started = builder.started_at(5)?;
    println!(
        "started at s = 5: max|Φ_5(2)| = {:.1e} (below s - m), Φ_5(5) = I: {}",
        started.at(2).amax(),
        linalg::rel_diff(started.at(5), &linalg::identity(3), &[]) < 1e-15
    );
    Ok(())
}
