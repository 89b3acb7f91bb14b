//! Dense matrix helpers: conditioning, inversion, cached integer powers and
//! the error metrics used to compare matrices and vectors.

use std::sync::RwLock;

use nalgebra::{DMatrix, DVector};
use twofloat::TwoFloat;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Default threshold below which a reciprocal condition estimate marks `A` as singular.
pub const DEFAULT_RCOND_THRESHOLD: f64 = 1e-12;

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

pub fn zeros(n: usize) -> Matrix {
    Matrix::zeros(n, n)
}

pub fn all_finite(m: &Matrix) -> bool {
    m.iter().all(|v| v.is_finite())
}

pub fn vec_all_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Max-abs entry; the infinity norm of the flattened entries.
pub fn max_abs(entries: impl IntoIterator<Item = f64>) -> f64 {
    entries.into_iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

fn one_norm(m: &Matrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse via partially pivoted LU, `None` if the factorization is singular.
pub fn inverse(m: &Matrix) -> Option<Matrix> {
    m.clone().lu().try_inverse().filter(all_finite)
}

/// Reciprocal 1-norm condition number `1 / (‖A‖₁ ‖A⁻¹‖₁)`, or 0 for a singular matrix.
///
/// The inverse is formed explicitly, which is exact (rather than an estimate) and
/// cheap for the small dimensions this crate targets.
pub fn rcond(m: &Matrix) -> f64 {
    if !m.is_square() || m.nrows() == 0 {
        return 0.0;
    }
    let norm = one_norm(m);
    if norm == 0.0 || !norm.is_finite() {
        return 0.0;
    }
    match inverse(m) {
        Some(inv) => {
            let r = 1.0 / (norm * one_norm(&inv));
            if r.is_finite() {
                r
            } else {
                0.0
            }
        }
        None => 0.0,
    }
}

/// 2-norm condition number from the singular values.
pub fn cond2(m: &Matrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Relative distance between two matrices: `max|a − b| / max(1, ‖scale_i‖∞)`.
///
/// `scales` are the operands the identity was assembled from; the denominator is the
/// largest of them, so cancellation between large terms is measured against their size.
pub fn rel_diff(a: &Matrix, b: &Matrix, scales: &[&Matrix]) -> f64 {
    let num = max_abs(a.iter().zip(b.iter()).map(|(x, y)| x - y));
    let den = scales
        .iter()
        .map(|s| max_abs(s.iter().cloned()))
        .chain([max_abs(a.iter().cloned()), max_abs(b.iter().cloned())])
        .fold(1.0, f64::max);
    num / den
}

/// Square matrix with double-double entries, used where many large terms are summed
/// into a possibly much smaller result.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtMatrix {
    n: usize,
    // row-major
    data: Vec<TwoFloat>,
}

impl ExtMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![TwoFloat::from(0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n);
        for i in 0..n {
            out.data[i * n + i] = TwoFloat::from(1.0);
        }
        out
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        let n = m.nrows();
        Self {
            n,
            data: (0..n * n)
                .map(|idx| TwoFloat::from(m[(idx / n, idx % n)]))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Round to `f64`.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| self.data[i * self.n + j].into())
    }

    pub fn add_assign(&mut self, other: &ExtMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
    }

    pub fn sub_assign(&mut self, other: &ExtMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a -= *b;
        }
    }

    /// `self += lhs · rhs`.
    pub fn add_product(&mut self, lhs: &ExtMatrix, rhs: &ExtMatrix) {
        let n = self.n;
        for i in 0..n {
            for k in 0..n {
                let l = lhs.data[i * n + k];
                if l == 0.0 {
                    continue;
                }
                for j in 0..n {
                    self.data[i * n + j] += rhs.data[k * n + j] * l;
                }
            }
        }
    }

    /// `lhs · rhs`.
    pub fn product(lhs: &ExtMatrix, rhs: &ExtMatrix) -> ExtMatrix {
        let mut out = ExtMatrix::zeros(lhs.n);
        out.add_product(lhs, rhs);
        out
    }

    /// `self += c · other` for an integer coefficient, exact up to 106 bits.
    pub fn add_scaled(&mut self, other: &ExtMatrix, c: u128) {
        let hi = c as f64;
        let lo = (c as i128 - hi as i128) as f64;
        let c = TwoFloat::new_add(hi, lo);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b * c;
        }
    }
}

/// Memoized integer powers `A^k` for `k ∈ Z`.
///
/// The inverse is factorized once at construction and refined to double-double accuracy;
/// negative powers are powers of that inverse. Powers are accumulated in double-double so
/// that `A^k` and `A^{−k}` stay mutual inverses to working precision even when their
/// norms grow apart. Powers are appended lazily behind a lock, so concurrent readers
/// either see a published power or compute the missing ones themselves.
#[derive(Debug)]
pub struct PowerCache {
    a: Matrix,
    a_inv: Matrix,
    a_ext: ExtMatrix,
    a_inv_ext: ExtMatrix,
    // positive[k] = A^k, negative[k] = A^{-k}; both start with I.
    positive: RwLock<Vec<ExtMatrix>>,
    negative: RwLock<Vec<ExtMatrix>>,
}

impl PowerCache {
    pub fn new(a: &Matrix) -> Result<Self> {
        let n = a.nrows();
        let singular = || Error::SingularA {
            rcond: rcond(a),
            threshold: DEFAULT_RCOND_THRESHOLD,
        };
        let a_inv = inverse(a).ok_or_else(singular)?;
        let check = a * &a_inv;
        if max_abs((check - identity(n)).iter().cloned()) > 1e-10 {
            return Err(singular());
        }
        let a_ext = ExtMatrix::from_matrix(a);
        let mut x = ExtMatrix::from_matrix(&a_inv);
        // Newton steps X ← X + X(I − AX); each squares the residual.
        for _ in 0..2 {
            let mut residual = ExtMatrix::identity(n);
            residual.sub_assign(&ExtMatrix::product(&a_ext, &x));
            let correction = ExtMatrix::product(&x, &residual);
            x.add_assign(&correction);
        }
        Ok(Self {
            a: a.clone(),
            a_inv: x.to_matrix(),
            a_ext,
            a_inv_ext: x,
            positive: RwLock::new(vec![ExtMatrix::identity(n)]),
            negative: RwLock::new(vec![ExtMatrix::identity(n)]),
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn inverse(&self) -> &Matrix {
        &self.a_inv
    }

    /// `A^k` for any integer `k`, rounded to `f64`.
    pub fn power(&self, k: i64) -> Matrix {
        self.power_ext(k).to_matrix()
    }

    /// `A^k` in double-double.
    pub fn power_ext(&self, k: i64) -> ExtMatrix {
        let (slot, base) = if k >= 0 {
            (&self.positive, &self.a_ext)
        } else {
            (&self.negative, &self.a_inv_ext)
        };
        let idx = k.unsigned_abs() as usize;
        {
            let cached = slot.read().unwrap_or_else(|e| e.into_inner());
            if let Some(p) = cached.get(idx) {
                return p.clone();
            }
        }
        let mut cached = slot.write().unwrap_or_else(|e| e.into_inner());
        while cached.len() <= idx {
            let next =
                ExtMatrix::product(base, cached.last().expect("cache starts with the identity"));
            cached.push(next);
        }
        cached[idx].clone()
    }

    pub fn apply(&self, k: i64, v: &Vector) -> Vector {
        self.power(k) * v
    }
}

impl Clone for PowerCache {
    fn clone(&self) -> Self {
        let read = |l: &RwLock<Vec<ExtMatrix>>| l.read().unwrap_or_else(|e| e.into_inner()).clone();
        Self {
            a: self.a.clone(),
            a_inv: self.a_inv.clone(),
            a_ext: self.a_ext.clone(),
            a_inv_ext: self.a_inv_ext.clone(),
            positive: RwLock::new(read(&self.positive)),
            negative: RwLock::new(read(&self.negative)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rcond_of_identity_is_one() {
        assert!((rcond(&identity(3)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rcond_of_zero_matrix_is_zero() {
        assert_eq!(rcond(&zeros(2)), 0.0);
    }

    #[test]
    fn rcond_of_nearly_singular_is_tiny() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-14]);
        assert!(rcond(&m) < 1e-12);
    }

    #[test]
    fn powers_match_repeated_products() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.5, -0.25, 2.0]);
        let cache = PowerCache::new(&a).unwrap();
        let a3 = &a * &a * &a;
        assert!(rel_diff(&cache.power(3), &a3, &[]) < 1e-15);
        let round = cache.power(-3) * cache.power(3);
        assert!(rel_diff(&round, &identity(2), &[]) < 1e-13);
        assert_eq!(cache.power(0), identity(2));
        // Filling out of order leaves every cached entry consistent.
        let p7 = cache.power(7);
        assert!(rel_diff(&p7, &(&a * cache.power(6)), &[]) < 1e-14);
    }

    #[test]
    fn long_powers_stay_mutual_inverses() {
        // Non-normal, so ‖A^k‖‖A^{-k}‖ grows geometrically.
        let a = Matrix::from_row_slice(2, 2, &[1.1, 0.9, 0.0, 0.9]);
        let cache = PowerCache::new(&a).unwrap();
        let (p, q) = (cache.power_ext(60), cache.power_ext(-60));
        let growth = cache.power(60).amax() * cache.power(-60).amax();
        assert!(growth > 1e6, "{growth}");
        let round = ExtMatrix::product(&p, &q).to_matrix();
        assert!(rel_diff(&round, &identity(2), &[]) < 1e-15);
    }

    #[test]
    fn ext_scaled_add_keeps_large_integers() {
        let one = ExtMatrix::identity(1);
        let mut acc = ExtMatrix::zeros(1);
        let big = (1u128 << 80) + 1;
        acc.add_scaled(&one, big);
        acc.sub_assign(&{
            let mut b = ExtMatrix::zeros(1);
            b.add_scaled(&one, 1u128 << 80);
            b
        });
        assert_eq!(acc.to_matrix()[(0, 0)], 1.0);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let err = PowerCache::new(&zeros(2)).unwrap_err();
        assert!(matches!(err, Error::SingularA { .. }));
    }

    #[test]
    fn rel_diff_uses_unit_floor() {
        let a = Matrix::from_element(1, 1, 1e-3);
        let b = Matrix::from_element(1, 1, 0.0);
        assert!((rel_diff(&a, &b, &[]) - 1e-3).abs() < 1e-18);
    }
}
