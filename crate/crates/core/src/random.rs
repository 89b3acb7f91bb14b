//! Seeded random test systems.
//!
//! `A` is drawn as `U diag(σ) Vᵀ` with orthogonal `U, V` and singular values in
//! `[1/1.1, 1.1]`. Every representation route passes through `A^{±k}`, so the spread of
//! singular values bounds how many digits survive at long horizons; uniform-entry
//! matrices lose all of them well before `k = 60` even at condition number 100.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, Matrix, Vector};
use crate::system::{DelaySystem, InitialFunction, MatrixSequence, VectorSequence};

/// Upper bound on the 2-norm condition number of generated `A`.
pub const MAX_CONDITION: f64 = 100.0;

/// Singular values of generated `A` lie in `[1/SPREAD, SPREAD]`.
pub const SINGULAR_VALUE_SPREAD: f64 = 1.1;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0))
}

pub fn uniform_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0))
}

fn orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    uniform_matrix(rng, n).qr().q()
}

/// Invertible `A` with bounded power growth, rejection-sampled for `cond₂(A) ≤ 100`.
pub fn well_conditioned<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    loop {
        let u = orthogonal(rng, n);
        let v = orthogonal(rng, n);
        let sigma = Vector::from_fn(n, |_, _| {
            rng.random_range(1.0 / SINGULAR_VALUE_SPREAD..=SINGULAR_VALUE_SPREAD)
        });
        let a = u * Matrix::from_diagonal(&sigma) * v.transpose();
        if linalg::cond2(&a) <= MAX_CONDITION {
            return a;
        }
    }
}

/// Length of the non-constant prefix of generated coefficient sequences.
pub fn prefix_len(m: usize) -> usize {
    2 * (m + 1) + 3
}

fn commutator_norm(a: &Matrix, b: &Matrix) -> f64 {
    linalg::max_abs((a * b - b * a).iter().cloned())
}

/// Random system with non-constant `B_k`, non-zero `f` and random `φ`.
///
/// For `n ≥ 2` every prefix member of `B` fails to commute with `A`.
pub fn random_system<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> DelaySystem {
    let a = well_conditioned(rng, n);
    let len = prefix_len(m);
    let mut draw_b = || loop {
        let b = uniform_matrix(rng, n);
        if n == 1 || commutator_norm(&a, &b) > 1e-3 {
            return b;
        }
    };
    let b_prefix: Vec<Matrix> = (0..len).map(|_| draw_b()).collect();
    let b_tail = draw_b();
    let b = MatrixSequence::new(b_prefix, b_tail).expect("square by construction");
    let f = VectorSequence::new(
        (0..len).map(|_| uniform_vector(rng, n)).collect(),
        uniform_vector(rng, n),
    )
    .expect("consistent by construction");
    let phi = InitialFunction::new(m, (0..=m).map(|_| uniform_vector(rng, n)).collect())
        .expect("m + 1 values");
    DelaySystem::new(a, m, b, f, phi).expect("generated systems are valid")
}

/// Random system whose constant `B = c₀I + c₁A + c₂A²` commutes with `A`.
pub fn random_permutable_system<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> DelaySystem {
    let a = well_conditioned(rng, n);
    let base = random_system(rng, n, m);
    permutable_variant(rng, &a, &base)
}

/// Replace `A` and `B` of `base` with `a` and a random quadratic polynomial in `a`.
pub fn permutable_variant<R: Rng + ?Sized>(
    rng: &mut R,
    a: &Matrix,
    base: &DelaySystem,
) -> DelaySystem {
    let n = a.nrows();
    let c: [f64; 3] = [
        rng.random_range(-1.0..=1.0),
        rng.random_range(-1.0..=1.0),
        rng.random_range(-1.0..=1.0),
    ];
    let b = linalg::identity(n) * c[0] + a * c[1] + a * a * c[2];
    DelaySystem::new(
        a.clone(),
        base.delay(),
        MatrixSequence::constant(b),
        base.f().clone(),
        base.phi().clone(),
    )
    .expect("generated systems are valid")
}

/// Uniform random matrix sequence with a prefix of `len` members and a random tail.
pub fn random_sequence<R: Rng + ?Sized>(rng: &mut R, n: usize, len: usize) -> MatrixSequence {
    MatrixSequence::new(
        (0..len).map(|_| uniform_matrix(rng, n)).collect(),
        uniform_matrix(rng, n),
    )
    .expect("square by construction")
}
