//! Data model for the Cauchy problem
//! `x(k+1) = A x(k) + B_k x(k−m) + f(k)`, `x(k) = φ(k)` on `−m ≤ k ≤ 0`.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ExtMatrix, Matrix, Vector, DEFAULT_RCOND_THRESHOLD};

/// An indexed family of square matrices `k ↦ M_k`, total for `k ≥ 0`.
pub trait MatrixFamily {
    fn dim(&self) -> usize;
    fn at(&self, k: usize) -> Cow<'_, Matrix>;

    /// `M_k` in double-double; families computed from other data override this to skip
    /// the rounding in [`MatrixFamily::at`].
    fn at_ext(&self, k: usize) -> ExtMatrix {
        ExtMatrix::from_matrix(&self.at(k))
    }

    /// The same family re-indexed to start at `offset`: `k ↦ M_{k+offset}`.
    fn shifted(&self, offset: usize) -> Shifted<'_, Self>
    where
        Self: Sized,
    {
        Shifted {
            inner: self,
            offset,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Shifted<'a, F> {
    inner: &'a F,
    offset: usize,
}

impl<F: MatrixFamily> MatrixFamily for Shifted<'_, F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn at(&self, k: usize) -> Cow<'_, Matrix> {
        self.inner.at(k + self.offset)
    }

    fn at_ext(&self, k: usize) -> ExtMatrix {
        self.inner.at_ext(k + self.offset)
    }
}

/// Eventually-constant matrix sequence: `prefix[k]` for `k < prefix.len()`, `tail` after.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSequence {
    prefix: Vec<Matrix>,
    tail: Matrix,
}

impl MatrixSequence {
    pub fn new(prefix: Vec<Matrix>, tail: Matrix) -> Result<Self> {
        let n = tail.nrows();
        check_square(&tail, n, "sequence tail")?;
        for (k, m) in prefix.iter().enumerate() {
            check_square(m, n, &format!("sequence prefix[{k}]"))?;
        }
        Ok(Self { prefix, tail })
    }

    pub fn constant(value: Matrix) -> Self {
        Self {
            prefix: Vec::new(),
            tail: value,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::constant(linalg::zeros(n))
    }

    pub fn prefix(&self) -> &[Matrix] {
        &self.prefix
    }

    pub fn tail(&self) -> &Matrix {
        &self.tail
    }

    pub fn lookup(&self, k: usize) -> &Matrix {
        self.prefix.get(k).unwrap_or(&self.tail)
    }

    /// The single value of the sequence if every member is identical.
    pub fn constant_value(&self) -> Option<&Matrix> {
        self.prefix
            .iter()
            .all(|m| m == &self.tail)
            .then_some(&self.tail)
    }
}

impl MatrixFamily for MatrixSequence {
    fn dim(&self) -> usize {
        self.tail.nrows()
    }

    fn at(&self, k: usize) -> Cow<'_, Matrix> {
        Cow::Borrowed(self.lookup(k))
    }
}

/// Eventually-constant vector sequence; the default tail is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSequence {
    prefix: Vec<Vector>,
    tail: Vector,
}

impl VectorSequence {
    pub fn new(prefix: Vec<Vector>, tail: Vector) -> Result<Self> {
        let n = tail.len();
        for (k, v) in prefix.iter().enumerate() {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    field: format!("f.prefix[{k}]"),
                    expected: n,
                    found: v.len(),
                });
            }
        }
        Ok(Self { prefix, tail })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            prefix: Vec::new(),
            tail: Vector::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.tail.len()
    }

    pub fn prefix(&self) -> &[Vector] {
        &self.prefix
    }

    pub fn tail(&self) -> &Vector {
        &self.tail
    }

    pub fn lookup(&self, k: usize) -> &Vector {
        self.prefix.get(k).unwrap_or(&self.tail)
    }

    pub fn is_zero(&self) -> bool {
        self.prefix
            .iter()
            .chain(std::iter::once(&self.tail))
            .all(|v| v.iter().all(|x| *x == 0.0))
    }
}

/// `φ(−m), …, φ(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialFunction {
    m: usize,
    values: Vec<Vector>,
}

impl InitialFunction {
    /// `values` are listed from `k = −m` to `k = 0`.
    pub fn new(m: usize, values: Vec<Vector>) -> Result<Self> {
        if m < 1 {
            return Err(Error::BadDelay(m as i64));
        }
        if values.len() != m + 1 {
            return Err(Error::DimensionMismatch {
                field: "phi (entries for k = -m..0)".into(),
                expected: m + 1,
                found: values.len(),
            });
        }
        if let Some(first) = values.first() {
            let n = first.len();
            for (i, v) in values.iter().enumerate() {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        field: format!("phi[{i}]"),
                        expected: n,
                        found: v.len(),
                    });
                }
            }
        }
        Ok(Self { m, values })
    }

    pub fn constant(m: usize, value: Vector) -> Self {
        Self {
            m,
            values: vec![value; m + 1],
        }
    }

    pub fn delay(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    /// `φ(k)` for `−m ≤ k ≤ 0`.
    pub fn at(&self, k: i64) -> &Vector {
        let idx = k + self.m as i64;
        assert!(
            (0..=self.m as i64).contains(&idx),
            "initial function queried at k = {k} outside [-{}, 0]",
            self.m
        );
        &self.values[idx as usize]
    }
}

/// A validated delay system. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySystem {
    a: Matrix,
    m: usize,
    b: MatrixSequence,
    f: VectorSequence,
    phi: InitialFunction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub rcond_threshold: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            rcond_threshold: DEFAULT_RCOND_THRESHOLD,
        }
    }
}

impl DelaySystem {
    pub fn new(
        a: Matrix,
        m: usize,
        b: MatrixSequence,
        f: VectorSequence,
        phi: InitialFunction,
    ) -> Result<Self> {
        Self::with_options(a, m, b, f, phi, ValidationOptions::default())
    }

    pub fn with_options(
        a: Matrix,
        m: usize,
        b: MatrixSequence,
        f: VectorSequence,
        phi: InitialFunction,
        opts: ValidationOptions,
    ) -> Result<Self> {
        if m < 1 {
            return Err(Error::BadDelay(m as i64));
        }
        let n = a.nrows();
        if n == 0 {
            return Err(Error::DimensionMismatch {
                field: "A".into(),
                expected: 1,
                found: 0,
            });
        }
        check_square(&a, n, "A")?;
        check_finite(&a, "A")?;
        if b.dim() != n {
            return Err(Error::DimensionMismatch {
                field: "B".into(),
                expected: n,
                found: b.dim(),
            });
        }
        for (k, bk) in b.prefix.iter().enumerate() {
            check_finite(bk, &format!("B.prefix[{k}]"))?;
        }
        check_finite(&b.tail, "B.tail")?;
        if f.dim() != n {
            return Err(Error::DimensionMismatch {
                field: "f".into(),
                expected: n,
                found: f.dim(),
            });
        }
        for (k, v) in f.prefix.iter().enumerate() {
            check_vec_finite(v, &format!("f.prefix[{k}]"))?;
        }
        check_vec_finite(&f.tail, "f.tail")?;
        if phi.delay() != m {
            return Err(Error::DimensionMismatch {
                field: "phi (entries for k = -m..0)".into(),
                expected: m + 1,
                found: phi.values.len(),
            });
        }
        for (i, v) in phi.values.iter().enumerate() {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    field: format!("phi[{i}]"),
                    expected: n,
                    found: v.len(),
                });
            }
            check_vec_finite(v, &format!("phi[{i}]"))?;
        }
        let rc = linalg::rcond(&a);
        if rc.is_nan() || rc <= opts.rcond_threshold {
            return Err(Error::SingularA {
                rcond: rc,
                threshold: opts.rcond_threshold,
            });
        }
        Ok(Self { a, m, b, f, phi })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn delay(&self) -> usize {
        self.m
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &MatrixSequence {
        &self.b
    }

    pub fn f(&self) -> &VectorSequence {
        &self.f
    }

    pub fn phi(&self) -> &InitialFunction {
        &self.phi
    }

    /// Same system with a different forcing term.
    pub fn with_forcing(&self, f: VectorSequence) -> Result<Self> {
        Self::new(self.a.clone(), self.m, self.b.clone(), f, self.phi.clone())
    }

    /// Same system with a different initial function.
    pub fn with_initial(&self, phi: InitialFunction) -> Result<Self> {
        Self::new(self.a.clone(), self.m, self.b.clone(), self.f.clone(), phi)
    }

    /// Same system with a different delay coefficient sequence.
    pub fn with_delay_matrices(&self, b: MatrixSequence) -> Result<Self> {
        Self::new(self.a.clone(), self.m, b, self.f.clone(), self.phi.clone())
    }

    pub fn to_raw(&self) -> RawSystem {
        RawSystem {
            n: self.dim(),
            m: self.m as i64,
            a: matrix_rows(&self.a),
            b: RawMatrixSequence {
                prefix: self.b.prefix.iter().map(matrix_rows).collect(),
                tail: matrix_rows(&self.b.tail),
            },
            f: Some(RawVectorSequence {
                prefix: self
                    .f
                    .prefix
                    .iter()
                    .map(|v| v.iter().cloned().collect())
                    .collect(),
                tail: Some(self.f.tail.iter().cloned().collect()),
            }),
            phi: self
                .phi
                .values
                .iter()
                .map(|v| v.iter().cloned().collect())
                .collect(),
        }
    }
}

/// Unvalidated system data as it appears in a system JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSystem {
    pub n: usize,
    pub m: i64,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: RawMatrixSequence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<RawVectorSequence>,
    pub phi: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMatrixSequence {
    #[serde(default)]
    pub prefix: Vec<Vec<Vec<f64>>>,
    pub tail: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawVectorSequence {
    #[serde(default)]
    pub prefix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<Vec<f64>>,
}

impl RawSystem {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("raw systems always serialize")
    }
}

/// Validate raw system data into a [`DelaySystem`].
pub fn validate_system(raw: &RawSystem, opts: ValidationOptions) -> Result<DelaySystem> {
    let n = raw.n;
    if n == 0 {
        return Err(Error::DimensionMismatch {
            field: "n".into(),
            expected: 1,
            found: 0,
        });
    }
    if raw.m < 1 {
        return Err(Error::BadDelay(raw.m));
    }
    let m = raw.m as usize;
    let a = matrix_from_rows(&raw.a, n, "A")?;
    let b_prefix = raw
        .b
        .prefix
        .iter()
        .enumerate()
        .map(|(k, rows)| matrix_from_rows(rows, n, &format!("B.prefix[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    let b_tail = matrix_from_rows(&raw.b.tail, n, "B.tail")?;
    let b = MatrixSequence::new(b_prefix, b_tail)?;
    let f = match &raw.f {
        None => VectorSequence::zero(n),
        Some(seq) => {
            let prefix = seq
                .prefix
                .iter()
                .enumerate()
                .map(|(k, v)| vector_from(v, n, &format!("f.prefix[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            let tail = match &seq.tail {
                Some(v) => vector_from(v, n, "f.tail")?,
                None => Vector::zeros(n),
            };
            VectorSequence::new(prefix, tail)?
        }
    };
    if raw.phi.len() != m + 1 {
        return Err(Error::DimensionMismatch {
            field: "phi (entries for k = -m..0)".into(),
            expected: m + 1,
            found: raw.phi.len(),
        });
    }
    let phi_values = raw
        .phi
        .iter()
        .enumerate()
        .map(|(i, v)| vector_from(v, n, &format!("phi[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let phi = InitialFunction::new(m, phi_values)?;
    DelaySystem::with_options(a, m, b, f, phi, opts)
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().cloned().collect()).collect()
}

fn matrix_from_rows(rows: &[Vec<f64>], n: usize, field: &str) -> Result<Matrix> {
    if rows.len() != n {
        return Err(Error::DimensionMismatch {
            field: format!("{field} (rows)"),
            expected: n,
            found: rows.len(),
        });
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                field: format!("{field} (row {i})"),
                expected: n,
                found: row.len(),
            });
        }
    }
    let m = Matrix::from_fn(n, n, |i, j| rows[i][j]);
    check_finite(&m, field)?;
    Ok(m)
}

fn vector_from(v: &[f64], n: usize, field: &str) -> Result<Vector> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            field: field.into(),
            expected: n,
            found: v.len(),
        });
    }
    let out = Vector::from_column_slice(v);
    check_vec_finite(&out, field)?;
    Ok(out)
}

fn check_square(m: &Matrix, n: usize, field: &str) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            field: field.into(),
            expected: n,
            found: if m.nrows() != n { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

fn check_finite(m: &Matrix, field: &str) -> Result<()> {
    if linalg::all_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFiniteEntry {
            field: field.into(),
        })
    }
}

fn check_vec_finite(v: &Vector, field: &str) -> Result<()> {
    if linalg::vec_all_finite(v) {
        Ok(())
    } else {
        Err(Error::NonFiniteEntry {
            field: field.into(),
        })
    }
}

/// States `x(−m), …, x(k_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    m: usize,
    k_max: usize,
    states: Vec<Vector>,
}

impl Trajectory {
    pub fn new(m: usize, k_max: usize, states: Vec<Vector>) -> Result<Self> {
        if states.len() != m + 1 + k_max {
            return Err(Error::ShapeMismatch(format!(
                "expected {} states for k = -{m}..{k_max}, got {}",
                m + 1 + k_max,
                states.len()
            )));
        }
        Ok(Self { m, k_max, states })
    }

    pub fn delay(&self) -> usize {
        self.m
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |v| v.len())
    }

    pub fn states(&self) -> &[Vector] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `x(k)` for `−m ≤ k ≤ k_max`.
    pub fn at(&self, k: i64) -> &Vector {
        &self.states[(k + self.m as i64) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Vector)> {
        let m = self.m as i64;
        self.states
            .iter()
            .enumerate()
            .map(move |(i, v)| (i as i64 - m, v))
    }

    pub fn map(&self, mut g: impl FnMut(i64, &Vector) -> Vector) -> Trajectory {
        let states = self.iter().map(|(k, v)| g(k, v)).collect();
        Trajectory {
            m: self.m,
            k_max: self.k_max,
            states,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw_identity() -> RawSystem {
        RawSystem {
            n: 2,
            m: 1,
            a: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            b: RawMatrixSequence {
                prefix: vec![],
                tail: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            },
            f: None,
            phi: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        }
    }

    #[test]
    fn identity_system_validates() {
        let sys = validate_system(&raw_identity(), ValidationOptions::default()).unwrap();
        assert_eq!(sys.dim(), 2);
        assert_eq!(sys.delay(), 1);
        assert!(sys.f().is_zero());
    }

    #[test]
    fn zero_a_is_singular() {
        let mut raw = raw_identity();
        raw.a = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let err = validate_system(&raw, ValidationOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SingularA { .. }));
        assert!(err.to_string().contains("matrix A"));
    }

    #[test]
    fn short_phi_is_dimension_mismatch() {
        let mut raw = raw_identity();
        raw.phi.pop();
        let err = validate_system(&raw, ValidationOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                found: 1,
                ..
            }
        ));
    }

    #[test]
    fn zero_delay_is_rejected() {
        let mut raw = raw_identity();
        raw.m = 0;
        raw.phi.pop();
        assert_eq!(
            validate_system(&raw, ValidationOptions::default()).unwrap_err(),
            Error::BadDelay(0)
        );
    }

    #[test]
    fn wrong_b_row_length_is_reported_with_field() {
        let mut raw = raw_identity();
        raw.b.prefix = vec![vec![vec![0.0, 0.0], vec![0.0]]];
        match validate_system(&raw, ValidationOptions::default()).unwrap_err() {
            Error::DimensionMismatch { field, .. } => assert!(field.contains("B.prefix[0]")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn threshold_is_configurable() {
        let mut raw = raw_identity();
        raw.a = vec![vec![1.0, 0.0], vec![0.0, 1e-6]];
        assert!(validate_system(&raw, ValidationOptions::default()).is_ok());
        let strict = ValidationOptions {
            rcond_threshold: 1e-3,
        };
        assert!(matches!(
            validate_system(&raw, strict).unwrap_err(),
            Error::SingularA { .. }
        ));
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let sys = validate_system(&raw_identity(), ValidationOptions::default()).unwrap();
        let bad =
            VectorSequence::new(vec![Vector::from_element(2, f64::NAN)], Vector::zeros(2)).unwrap();
        assert_eq!(
            sys.with_forcing(bad).unwrap_err(),
            Error::NonFiniteEntry {
                field: "f.prefix[0]".into()
            }
        );
    }

    #[test]
    fn validation_is_idempotent() {
        let sys = validate_system(&raw_identity(), ValidationOptions::default()).unwrap();
        let again = validate_system(&sys.to_raw(), ValidationOptions::default()).unwrap();
        assert_eq!(sys, again);
    }

    #[test]
    fn sequences_are_total() {
        let seq = MatrixSequence::new(vec![linalg::identity(2)], linalg::zeros(2)).unwrap();
        assert_eq!(seq.lookup(0), &linalg::identity(2));
        assert_eq!(seq.lookup(1_000_000), &linalg::zeros(2));
        assert_eq!(seq.shifted(1).at(0).as_ref(), &linalg::zeros(2));
    }

    #[test]
    fn json_round_trip_and_missing_forcing() {
        let text = r#"{"n": 1, "m": 2, "A": [[1.0]], "B": {"prefix": [], "tail": [[1.0]]},
                       "phi": [[1.0], [1.0], [1.0]]}"#;
        let raw = RawSystem::from_json(text).unwrap();
        assert!(raw.f.is_none());
        let sys = validate_system(&raw, ValidationOptions::default()).unwrap();
        let back = RawSystem::from_json(&sys.to_raw().to_json()).unwrap();
        assert_eq!(
            validate_system(&back, ValidationOptions::default()).unwrap(),
            sys
        );
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = RawSystem::from_json("{\"n\": 1,\n \"m\": }").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
