//! The delayed matrix exponential of a matrix sequence `𝔇 = {D_0, D_1, …}`.
//!
//! The layers `P(k, d)` are d-fold nested sums of ordered products
//!
//! ```text
//! P(k, d) = Σ_{j₁=(d−1)(m+1)}^{k−1} D_{j₁} Σ_{j₂=(d−1)(m+1)}^{j₁} D_{j₂−(m+1)} … Σ_{j_d=(d−1)(m+1)}^{j_{d−1}} D_{j_d−(d−1)(m+1)}
//! ```
//!
//! with `P(k, 0) = I` for every `k` and `P(k, d) = Θ` when the outer sum is empty
//! (`k ≤ (d−1)(m+1)`). The exponential itself is
//!
//! ```text
//! e(k) = Θ                      k ≤ −m−1
//!        I                      −m ≤ k ≤ 0
//!        I + Σ_{d=1}^{l} P(k,d)  (l−1)(m+1)+1 ≤ k ≤ l(m+1)
//! ```
//!
//! and satisfies `e(k+1) − e(k) = D_k e(k−m)` for all `k ≥ 0` without any
//! commutativity between the `D_k`.
//!
//! [`p_direct`] evaluates the nested sum literally and is only meant as a reference;
//! [`p_table`] fills the layers with the first-difference recurrence
//! `P(k+1, d) = P(k, d) + D_k P(k−m, d−1)`.
//!
//! Layers of a long horizon can be many orders of magnitude larger than their sum, so
//! the table and the closed form accumulate in double-double and round once at the end.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::linalg::{self, ExtMatrix, Matrix};
use crate::system::MatrixFamily;

/// Default cap on the number of index tuples [`p_direct`] will enumerate.
pub const DEFAULT_WORK_BUDGET: u128 = 10_000_000;

/// The unique `l ≥ 1` with `(l−1)(m+1)+1 ≤ k ≤ l(m+1)`, i.e. `⌈k/(m+1)⌉`.
pub fn block_index(k: i64, m: usize) -> Result<usize> {
    if m < 1 {
        return Err(Error::BadDelay(m as i64));
    }
    if k < 1 {
        return Err(Error::Domain(format!("block index needs k >= 1, got {k}")));
    }
    let k = k as usize;
    Ok(k.div_ceil(m + 1))
}

/// `C(n, k)` by the multiplicative formula with checked 128-bit arithmetic.
pub fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc·(n−i) is divisible by (i+1); split the divisor so the product stays exact.
        let (num, den) = ((n - i) as u128, i as u128 + 1);
        let g = acc.gcd(&den);
        acc = (acc / g)
            .checked_mul(num / (den / g))
            .ok_or(Error::BinomialOverflow { n, k })?;
    }
    Ok(acc)
}

/// Lower bound `(d−1)(m+1)` shared by every summation index of layer `d`.
fn layer_floor(m: usize, d: usize) -> i64 {
    (d as i64 - 1) * (m as i64 + 1)
}

/// Number of index tuples `(j₁, …, j_d)` in the nested sum for `P(k, d)`, by enumeration.
///
/// Equals `C(k − (d−1)m, d)` on the admissible range and 0 when the outer sum is empty.
pub fn nested_sum_count(m: usize, k: i64, d: usize) -> u128 {
    fn walk(level: usize, d: usize, floor: i64, upper: i64) -> u128 {
        if level > d {
            return 1;
        }
        (floor..=upper).map(|j| walk(level + 1, d, floor, j)).sum()
    }
    if d == 0 {
        return 1;
    }
    walk(1, d, layer_floor(m, d), k - 1)
}

/// `P(k, d)` evaluated directly from the nested-sum definition.
pub fn p_direct<F: MatrixFamily>(seq: &F, m: usize, k: i64, d: usize) -> Result<Matrix> {
    p_direct_with_budget(seq, m, k, d, DEFAULT_WORK_BUDGET)
}

pub fn p_direct_with_budget<F: MatrixFamily>(
    seq: &F,
    m: usize,
    k: i64,
    d: usize,
    budget: u128,
) -> Result<Matrix> {
    if m < 1 {
        return Err(Error::BadDelay(m as i64));
    }
    let n = seq.dim();
    if d == 0 {
        return Ok(linalg::identity(n));
    }
    if k < 0 {
        return Err(Error::Domain(format!(
            "P(k, d) with d >= 1 needs k >= 0, got k = {k}"
        )));
    }
    let floor = layer_floor(m, d);
    if k - 1 < floor {
        return Ok(linalg::zeros(n));
    }
    let tuples = binomial((k - (d as i64 - 1) * m as i64) as u64, d as u64)?;
    if tuples > budget {
        return Err(Error::WorkBudgetExceeded { tuples, budget });
    }

    // inner(level, upper) = Σ_{j=floor}^{upper} D_{j − (level−1)(m+1)} · inner(level+1, j)
    fn inner<F: MatrixFamily>(
        seq: &F,
        m: usize,
        d: usize,
        floor: i64,
        level: usize,
        upper: i64,
    ) -> Result<Matrix> {
        let n = seq.dim();
        let mut acc = linalg::zeros(n);
        let shift = (level as i64 - 1) * (m as i64 + 1);
        for j in floor..=upper {
            let index = j - shift;
            if index < 0 {
                return Err(Error::NegativeInnerIndex { index });
            }
            let factor = seq.at(index as usize);
            if level == d {
                acc += factor.as_ref();
            } else {
                acc += factor.as_ref() * inner(seq, m, d, floor, level + 1, j)?;
            }
        }
        Ok(acc)
    }

    inner(seq, m, d, floor, 1, k - 1)
}

/// All layers `P(k, d)` for `0 ≤ k ≤ k_max`, `0 ≤ d ≤ ⌈k/(m+1)⌉`.
#[derive(Debug, Clone, PartialEq)]
pub struct PTable {
    m: usize,
    k_max: usize,
    n: usize,
    // cells[k][d], d = 1..=block_index(k) stored at index d - 1
    cells: Vec<Vec<ExtMatrix>>,
}

impl PTable {
    pub fn delay(&self) -> usize {
        self.m
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored layers at `k` (excluding `d = 0`).
    pub fn layers_at(&self, k: usize) -> usize {
        self.cells[k].len()
    }

    /// `P(k, d)` with the identity/empty-sum conventions applied outside the stored grid.
    ///
    /// Panics if `k > k_max`.
    pub fn get(&self, k: i64, d: usize) -> Matrix {
        if d == 0 {
            return linalg::identity(self.n);
        }
        if k <= layer_floor(self.m, d) {
            return linalg::zeros(self.n);
        }
        assert!(
            k as usize <= self.k_max,
            "P({k}, {d}) requested beyond table horizon {}",
            self.k_max
        );
        self.cells[k as usize][d - 1].to_matrix()
    }

    fn cell(&self, k: i64, d: usize) -> Option<&ExtMatrix> {
        if d == 0 || k <= layer_floor(self.m, d) {
            None
        } else {
            Some(&self.cells[k as usize][d - 1])
        }
    }

    /// `e(k)`; panics if `k > k_max`.
    pub fn delayed_exp(&self, k: i64) -> Matrix {
        self.delayed_exp_ext(k).to_matrix()
    }

    /// `e(k)` before rounding to `f64`.
    pub fn delayed_exp_ext(&self, k: i64) -> ExtMatrix {
        let m = self.m as i64;
        if k < -m {
            return ExtMatrix::zeros(self.n);
        }
        if k <= 0 {
            return ExtMatrix::identity(self.n);
        }
        assert!(
            k as usize <= self.k_max,
            "e({k}) requested beyond table horizon {}",
            self.k_max
        );
        let mut e = ExtMatrix::identity(self.n);
        for p in &self.cells[k as usize] {
            e.add_assign(p);
        }
        e
    }
}

/// Fill the layer table by the first-difference recurrence. Cost `O(k_max · l_max · n³)`.
pub fn p_table<F: MatrixFamily>(seq: &F, m: usize, k_max: usize) -> PTable {
    assert!(m >= 1, "delay must be at least 1");
    let n = seq.dim();
    let mut table = PTable {
        m,
        k_max,
        n,
        cells: Vec::with_capacity(k_max + 1),
    };
    table.cells.push(Vec::new());
    for k in 0..k_max {
        let next = k + 1;
        let layers = next.div_ceil(m + 1);
        let dk = seq.at_ext(k);
        let mut row = Vec::with_capacity(layers);
        let (ki, mi) = (k as i64, m as i64);
        for d in 1..=layers {
            let mut cell = table
                .cell(ki, d)
                .cloned()
                .unwrap_or_else(|| ExtMatrix::zeros(n));
            if d == 1 {
                cell.add_assign(&dk);
            } else if let Some(prev) = table.cell(ki - mi, d - 1) {
                cell.add_product(&dk, prev);
            }
            row.push(cell);
        }
        table.cells.push(row);
    }
    table
}

/// `e(k)` for any integer `k`, via a layer table up to `max(k, 0)`.
pub fn delayed_exp<F: MatrixFamily>(seq: &F, m: usize, k: i64) -> Matrix {
    let horizon = k.max(0) as usize;
    p_table(seq, m, horizon).delayed_exp(k)
}

/// Closed form for a constant sequence `D_k ≡ D`:
/// `e(k) = I + Σ_{d=1}^{l} C(k−(d−1)m, d) D^d` on block `l`.
pub fn delayed_exp_permutable(d: &Matrix, m: usize, k: i64) -> Result<Matrix> {
    let n = d.nrows();
    let mi = m as i64;
    if m < 1 {
        return Err(Error::BadDelay(0));
    }
    if k < -mi {
        return Ok(linalg::zeros(n));
    }
    if k <= 0 {
        return Ok(linalg::identity(n));
    }
    let l = block_index(k, m)?;
    let d = ExtMatrix::from_matrix(d);
    let mut e = ExtMatrix::identity(n);
    let mut power = ExtMatrix::identity(n);
    for layer in 1..=l {
        power = ExtMatrix::product(&power, &d);
        let c = binomial((k - (layer as i64 - 1) * mi) as u64, layer as u64)?;
        e.add_scaled(&power, c);
    }
    Ok(e.to_matrix())
}
