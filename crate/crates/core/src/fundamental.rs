//! Fundamental matrices of `x(k+1) = A x(k) + B_k x(k−m)`.
//!
//! With `D_k = A^{−k−1} B_k A^{k−m}` and `e` the delayed exponential of `{D_k}`,
//! `Φ(k) = A^k e(k)` solves
//!
//! ```text
//! Φ(k+1) = A Φ(k) + B_k Φ(k−m),  k ≥ 0,     Φ(k) = A^k on −m ≤ k ≤ 0,   Θ below.
//! ```
//!
//! The coefficient in front of `Φ(k−m)` is `B_k`, not `D_k`: `A^{k+1} D_k = B_k A^{k−m}`.
//!
//! More generally `Φ_s(k) = A^k e_s(k−s) A^{−s}`, with `e_s` the delayed exponential of
//! the shifted sequence `{D_{s+i}}`, is the fundamental matrix started at time `s`:
//! it equals `A^{k−s}` on `s−m ≤ k ≤ s`, vanishes before, and follows the recursion
//! from `k = s` on. `Φ_0 = Φ`.

use std::borrow::Cow;

use crate::delayed_exp::{p_table, PTable};
use crate::error::{Error, Result};
use crate::linalg::{self, ExtMatrix, Matrix, PowerCache};
use crate::system::{DelaySystem, MatrixFamily, MatrixSequence};

/// `D_k = A^{−k−1} B_k A^{k−m}`, precomputed up to a horizon and evaluated on demand after.
#[derive(Debug, Clone)]
pub struct DSequence {
    powers: PowerCache,
    b: MatrixSequence,
    m: usize,
    cached: Vec<(Matrix, ExtMatrix)>,
}

impl DSequence {
    pub fn new(powers: &PowerCache, b: &MatrixSequence, m: usize, horizon: usize) -> Self {
        let mut seq = Self {
            powers: powers.clone(),
            b: b.clone(),
            m,
            cached: Vec::new(),
        };
        seq.cached = (0..=horizon)
            .map(|k| {
                let d = seq.compute(k);
                (d.to_matrix(), d)
            })
            .collect();
        seq
    }

    fn compute(&self, k: usize) -> ExtMatrix {
        let k = k as i64;
        let left = ExtMatrix::product(
            &self.powers.power_ext(-k - 1),
            &ExtMatrix::from_matrix(self.b.lookup(k as usize)),
        );
        ExtMatrix::product(&left, &self.powers.power_ext(k - self.m as i64))
    }
}

impl MatrixFamily for DSequence {
    fn dim(&self) -> usize {
        self.b.dim()
    }

    fn at(&self, k: usize) -> Cow<'_, Matrix> {
        match self.cached.get(k) {
            Some((d, _)) => Cow::Borrowed(d),
            None => Cow::Owned(self.compute(k).to_matrix()),
        }
    }

    fn at_ext(&self, k: usize) -> ExtMatrix {
        match self.cached.get(k) {
            Some((_, d)) => d.clone(),
            None => self.compute(k),
        }
    }
}

/// The transformed sequence `D_k = A^{−k−1} B_k A^{k−m}`, materialized for `k ≤ horizon`.
pub fn transform_d(a: &Matrix, b: &MatrixSequence, m: usize, horizon: usize) -> Result<DSequence> {
    let powers = PowerCache::new(a)?;
    Ok(DSequence::new(&powers, b, m, horizon))
}

/// `Φ_s(k)` for `−m−1 ≤ k ≤ k_max`; `Θ` below that range.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalMatrix {
    m: usize,
    start: i64,
    k_max: usize,
    values: Vec<Matrix>,
    zero: Matrix,
}

impl FundamentalMatrix {
    fn from_values(m: usize, start: i64, k_max: usize, values: Vec<Matrix>) -> Result<Self> {
        let n = values[0].nrows();
        if let Some(i) = values.iter().position(|v| !linalg::all_finite(v)) {
            return Err(Error::Overflow {
                k: i as i64 - m as i64 - 1,
            });
        }
        Ok(Self {
            m,
            start,
            k_max,
            values,
            zero: linalg::zeros(n),
        })
    }

    pub fn delay(&self) -> usize {
        self.m
    }

    /// Time at which the initial segment ends (`0` for the standard `Φ`).
    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `Φ_s(k)` for any `k ≤ k_max`.
    pub fn at(&self, k: i64) -> &Matrix {
        let offset = k + self.m as i64 + 1;
        if offset < 0 {
            return &self.zero;
        }
        self.values.get(offset as usize).unwrap_or_else(|| {
            panic!(
                "fundamental matrix queried at k = {k} beyond horizon {}",
                self.k_max
            )
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Matrix)> {
        let lo = -(self.m as i64) - 1;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (lo + i as i64, v))
    }

    /// Largest relative residual of `Φ(k+1) = A Φ(k) + M_k Φ(k−m)` over `from ≤ k < k_max`.
    pub fn residual<F: MatrixFamily>(&self, a: &Matrix, coeff: &F, from: i64) -> f64 {
        let m = self.m as i64;
        (from.max(-m - 1)..self.k_max as i64)
            .map(|k| {
                let lhs = self.at(k + 1);
                let step = a * self.at(k);
                let delayed = coeff.at(k.max(0) as usize).as_ref() * self.at(k - m);
                linalg::rel_diff(lhs, &(&step + &delayed), &[&step, &delayed])
            })
            .fold(0.0, f64::max)
    }
}

/// Shared state for building `Φ_s` for several start times of one system.
#[derive(Debug, Clone)]
pub struct FundamentalBuilder {
    powers: PowerCache,
    d: DSequence,
    m: usize,
    k_max: usize,
}

impl FundamentalBuilder {
    pub fn new(system: &DelaySystem, k_max: usize) -> Result<Self> {
        let powers = PowerCache::new(system.a())?;
        let m = system.delay();
        let d = DSequence::new(&powers, system.b(), m, k_max + m + 1);
        Ok(Self {
            powers,
            d,
            m,
            k_max,
        })
    }

    pub fn powers(&self) -> &PowerCache {
        &self.powers
    }

    pub fn d_sequence(&self) -> &DSequence {
        &self.d
    }

    /// Layer table of the sequence shifted to start at `s`, up to the horizon still needed.
    pub fn shifted_table(&self, start: usize) -> PTable {
        let horizon = self.k_max.saturating_sub(start);
        p_table(&self.d.shifted(start), self.m, horizon)
    }

    /// `Φ_s(k) = A^k e_s(k−s) A^{−s}` on `−m−1 ≤ k ≤ k_max`.
    pub fn started_at(&self, start: usize) -> Result<FundamentalMatrix> {
        let table = self.shifted_table(start);
        let (m, s) = (self.m as i64, start as i64);
        let shift_back = self.powers.power_ext(-s);
        let values = (-m - 1..=self.k_max as i64)
            .map(|k| {
                let t = k - s;
                if t < -m {
                    linalg::zeros(self.powers.dim())
                } else if t <= 0 {
                    self.powers.power(t)
                } else {
                    let left =
                        ExtMatrix::product(&self.powers.power_ext(k), &table.delayed_exp_ext(t));
                    ExtMatrix::product(&left, &shift_back).to_matrix()
                }
            })
            .collect();
        FundamentalMatrix::from_values(self.m, s, self.k_max, values)
    }

    pub fn phi(&self) -> Result<FundamentalMatrix> {
        self.started_at(0)
    }
}

/// `Φ(k) = A^k e(k)` on `−m−1 ≤ k ≤ k_max`.
pub fn fundamental_phi(system: &DelaySystem, k_max: usize) -> Result<FundamentalMatrix> {
    FundamentalBuilder::new(system, k_max)?.phi()
}

/// `Φ_s` by stepping `Φ(k+1) = A Φ(k) + B_k Φ(k−m)` from the initial segment `A^{k−s}`.
pub fn phi_oracle_started_at(
    system: &DelaySystem,
    start: usize,
    k_max: usize,
) -> Result<FundamentalMatrix> {
    let powers = PowerCache::new(system.a())?;
    let m = system.delay() as i64;
    let s = start as i64;
    let lo = -m - 1;
    let mut values: Vec<Matrix> = Vec::with_capacity(k_max + m as usize + 2);
    let at = |values: &Vec<Matrix>, k: i64| -> Matrix {
        if k < lo {
            linalg::zeros(system.dim())
        } else {
            values[(k - lo) as usize].clone()
        }
    };
    for k in lo..=k_max as i64 {
        let t = k - s;
        let value = if t < -m {
            linalg::zeros(system.dim())
        } else if t <= 0 {
            powers.power(t)
        } else {
            let prev = k - 1;
            system.a() * at(&values, prev)
                + system.b().lookup(prev as usize) * at(&values, prev - m)
        };
        if !linalg::all_finite(&value) {
            return Err(Error::Overflow { k });
        }
        values.push(value);
    }
    FundamentalMatrix::from_values(system.delay(), s, k_max, values)
}

/// `Φ` by direct stepping of its defining recursion.
pub fn phi_oracle(system: &DelaySystem, k_max: usize) -> Result<FundamentalMatrix> {
    phi_oracle_started_at(system, 0, k_max)
}
