//! Number of index tuples in each nested sum against the binomial count.

use discrete_delay::{binomial, block_index, nested_sum_count};

fn main() -> discrete_delay::Result<()> {
    let m = 2;
    println!("m = {m}");
    println!("k   d  tuples  C(k-(d-1)m, d)");
    for k in 1..=12i64 {
        for d in 1..=block_index(k, m)? {
            let tuples = nested_sum_count(m, k, d);
            let closed = binomial((k - (d as i64 - 1) * m as i64) as u64, d as u64)?;
            println!("{k:<3} {d:<2} {tuples:<7} {closed}");
            assert_eq!(tuples, closed);
        }
    }
    Ok(())
}
