//! The change of variables z(k) = A^{-k} x(k) and the transformed recursion.

use discrete_delay::fundamental::FundamentalBuilder;
use discrete_delay::random::{self, random_system};
use discrete_delay::{
    from_z_trajectory, solve_recursion, to_z_trajectory, MatrixFamily, PowerCache,
};

fn main() -> discrete_delay::Result<()> {
    let system = random_system(&mut random::seeded(5), 2, 1);
    let m = system.delay() as i64;
    let x = solve_recursion(&system, 30)?;
    let z = to_z_trajectory(&system, &x)?;
    let builder = FundamentalBuilder::new(&system, 30)?;
    let d = builder.d_sequence();
    let powers = PowerCache::new(system.a())?;

    let mut worst = 0.0f64;
    for k in 0..30i64 {
        let rhs = z.at(k)
            + d.at(k as usize).as_ref() * z.at(k - m)
            + powers.apply(-k - 1, system.f().lookup(k as usize));
        worst = worst.max((z.at(k + 1) - rhs).amax());
    }
    println!("z(k+1) = z(k) + D_k z(k-m) + A^(-k-1) f(k): max residual {worst:.2e}");

    let back = from_z_trajectory(&system, &z)?;
    let err = x
        .iter()
        .map(|(k, v)| (v - back.at(k)).amax())
        .fold(0.0, f64::max);
    println!("x -> z -> x round trip: max error {err:.2e}");
    Ok(())
}
