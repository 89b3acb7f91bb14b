//! Timing sweep: direct nested sums vs the layer table vs plain recursion.

use std::io::Write;
use std::time::Instant;

use crate::csv_io::fmt_float;
use crate::delayed_exp::{block_index, p_direct, p_table};
use crate::error::Result;
use crate::random;
use crate::solver::solve_recursion;
use crate::system::MatrixSequence;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub method: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub dims: Vec<usize>,
    pub delays: Vec<usize>,
    pub horizons: Vec<usize>,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            dims: vec![1, 2, 4],
            delays: vec![1, 2, 4],
            horizons: vec![8, 12, 16],
            seed: 42,
        }
    }
}

fn timed(f: impl FnOnce() -> Result<()>) -> Result<f64> {
    let start = Instant::now();
    f()?;
    Ok(start.elapsed().as_secs_f64())
}

/// Time `e(k)` through `p_direct`, through `p_table`, and `x(0..k)` through recursion.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rng = random::seeded(cfg.seed);
    let mut rows = Vec::new();
    for &n in &cfg.dims {
        for &m in &cfg.delays {
            let system = random::random_system(&mut rng, n, m);
            let seq: MatrixSequence = system.b().clone();
            for &k in &cfg.horizons {
                let ki = k as i64;
                let direct = timed(|| {
                    let mut e = crate::linalg::identity(n);
                    for d in 1..=block_index(ki.max(1), m)? {
                        e += p_direct(&seq, m, ki, d)?;
                    }
                    std::hint::black_box(e);
                    Ok(())
                })?;
                let table = timed(|| {
                    std::hint::black_box(p_table(&seq, m, k).delayed_exp(ki));
                    Ok(())
                })?;
                let recursion = timed(|| {
                    std::hint::black_box(solve_recursion(&system, k)?);
                    Ok(())
                })?;
                for (method, seconds) in [
                    ("p_direct", direct),
                    ("p_table", table),
                    ("recursion", recursion),
                ] {
                    rows.push(BenchRow {
                        n,
                        m,
                        k,
                        method,
                        seconds,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// `n,m,k,method,seconds`.
pub fn write_bench<W: Write>(mut w: W, rows: &[BenchRow]) -> Result<()> {
    writeln!(w, "n,m,k,method,seconds")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.n,
            r.m,
            r.k,
            r.method,
            fmt_float(r.seconds)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_sweep_has_three_methods_per_point() {
        let cfg = BenchConfig {
            dims: vec![2],
            delays: vec![1],
            horizons: vec![4, 6],
            seed: 1,
        };
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        let mut buf = Vec::new();
        write_bench(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,m,k,method,seconds\n2,1,4,p_direct,"));
    }
}
