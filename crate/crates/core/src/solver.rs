//! Solution trajectories of the Cauchy problem: direct recursion (the oracle) and the
//! closed representation through fundamental matrices.
//!
//! The representation writes the solution as
//!
//! ```text
//! x(k) = K_{−m}(k) φ(−m) + Σ_{j=−m+1}^{0} K_j(k) (φ(j) − A φ(j−1)) + Σ_{j=1}^{k} K_j(k) f(j−1)
//! ```
//!
//! with kernel `K_j(k) = A^k e_{m+j}(k−m−j) A^{−j} = Φ_{m+j}(k) A^m`, where `e_s` is the
//! delayed exponential of the shifted sequence `{D_{s+i}}` (see [`crate::fundamental`]).
//! When `A` and a constant `B` commute the shift has no effect and the kernel reduces to
//! `A^{m+j} Φ(k−m−j) A^{−j}`; [`Formula`] keeps that reduced form and a sign-flipped
//! variant available for comparison.

use std::fmt;
use std::str::FromStr;

use crate::delayed_exp::delayed_exp_permutable;
use crate::error::{Error, Result};
use crate::fundamental::{FundamentalBuilder, FundamentalMatrix};
use crate::linalg::{self, Matrix, PowerCache, Vector};
use crate::system::{DelaySystem, Trajectory};

/// Which kernel the representation is evaluated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formula {
    /// `K_j(k) = Φ_{m+j}(k) A^m`: exact for arbitrary `A` and `B_k`.
    #[default]
    Shifted,
    /// `K_j(k) = A^{m+j} Φ(k−m−j) A^{−j}`: exact only when `A B_k = B_k A` and `B_k ≡ B`.
    Unshifted,
    /// As [`Formula::Unshifted`] but with the first term `Φ(k) A^{−m} φ(−m)`; never exact
    /// unless `A^{2m} φ(−m) = φ(−m)`.
    FlippedSign,
}

impl Formula {
    pub const ALL: [Formula; 3] = [Formula::Shifted, Formula::Unshifted, Formula::FlippedSign];

    pub fn name(self) -> &'static str {
        match self {
            Formula::Shifted => "shifted",
            Formula::Unshifted => "unshifted",
            Formula::FlippedSign => "flipped-sign",
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Formula::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown formula {s:?}")))
    }
}

fn check_state(k: i64, v: &Vector) -> Result<()> {
    if linalg::vec_all_finite(v) {
        Ok(())
    } else {
        Err(Error::Overflow { k })
    }
}

/// Steps `x(k+1) = A x(k) + B_k x(k−m) + f(k)` from `φ`.
pub fn solve_recursion(system: &DelaySystem, k_max: usize) -> Result<Trajectory> {
    let m = system.delay();
    let mut states: Vec<Vector> = system.phi().values().to_vec();
    states.reserve(k_max);
    for k in 0..k_max {
        // states[i] = x(i − m)
        let current = &states[k + m];
        let delayed = &states[k];
        let next = system.a() * current + system.b().lookup(k) * delayed + system.f().lookup(k);
        check_state(k as i64 + 1, &next)?;
        states.push(next);
    }
    Trajectory::new(m, k_max, states)
}

/// Kernel evaluator shared by the homogeneous and forced parts.
struct Kernels {
    formula: Formula,
    m: i64,
    powers: PowerCache,
    phi: FundamentalMatrix,
    // started[s] = Φ_s, only for Formula::Shifted
    started: Vec<FundamentalMatrix>,
}

impl Kernels {
    fn new(system: &DelaySystem, k_max: usize, formula: Formula) -> Result<Self> {
        let builder = FundamentalBuilder::new(system, k_max)?;
        let m = system.delay();
        let phi = builder.phi()?;
        let started = match formula {
            Formula::Shifted => (0..=m + k_max)
                .map(|s| builder.started_at(s))
                .collect::<Result<Vec<_>>>()?,
            Formula::Unshifted | Formula::FlippedSign => Vec::new(),
        };
        Ok(Self {
            formula,
            m: m as i64,
            powers: builder.powers().clone(),
            phi,
            started,
        })
    }

    /// `K_j(k) w`.
    fn apply(&self, j: i64, k: i64, w: &Vector) -> Vector {
        let m = self.m;
        match self.formula {
            Formula::Shifted => self.started[(m + j) as usize].at(k) * self.powers.apply(m, w),
            Formula::Unshifted | Formula::FlippedSign => {
                self.powers.power(m + j) * (self.phi.at(k - m - j) * self.powers.apply(-j, w))
            }
        }
    }

    /// Contribution of `φ(−m)`.
    fn leading(&self, k: i64, phi_first: &Vector) -> Vector {
        match self.formula {
            Formula::FlippedSign => self.phi.at(k) * self.powers.apply(-self.m, phi_first),
            _ => self.apply(-self.m, k, phi_first),
        }
    }
}

fn evaluate(
    system: &DelaySystem,
    k_max: usize,
    formula: Formula,
    forced: bool,
) -> Result<Trajectory> {
    let kernels = Kernels::new(system, k_max, formula)?;
    let m = system.delay() as i64;
    let phi = system.phi();
    let a = system.a();
    let jumps: Vec<(i64, Vector)> = (-m + 1..=0)
        .map(|j| (j, phi.at(j) - a * phi.at(j - 1)))
        .collect();
    let mut states = Vec::with_capacity(k_max + m as usize + 1);
    for k in -m..=k_max as i64 {
        let mut x = kernels.leading(k, phi.at(-m));
        for (j, w) in &jumps {
            x += kernels.apply(*j, k, w);
        }
        if forced {
            for j in 1..=k {
                x += kernels.apply(j, k, system.f().lookup(j as usize - 1));
            }
        }
        check_state(k, &x)?;
        states.push(x);
    }
    Trajectory::new(m as usize, k_max, states)
}

/// Representation of the solution with `f ≡ 0`.
pub fn solve_homogeneous_rep(system: &DelaySystem, k_max: usize) -> Result<Trajectory> {
    solve_homogeneous_rep_with(system, k_max, Formula::Shifted)
}

pub fn solve_homogeneous_rep_with(
    system: &DelaySystem,
    k_max: usize,
    formula: Formula,
) -> Result<Trajectory> {
    if !system.f().is_zero() {
        return Err(Error::Unsupported(
            "the homogeneous representation needs a zero forcing term".into(),
        ));
    }
    evaluate(system, k_max, formula, false)
}

/// Representation of the full solution including the forcing term.
pub fn solve_nonhomogeneous_rep(system: &DelaySystem, k_max: usize) -> Result<Trajectory> {
    solve_nonhomogeneous_rep_with(system, k_max, Formula::Shifted)
}

pub fn solve_nonhomogeneous_rep_with(
    system: &DelaySystem,
    k_max: usize,
    formula: Formula,
) -> Result<Trajectory> {
    evaluate(system, k_max, formula, true)
}

/// The representation for constant `B`, with `Φ(k) = A^k e(k)` taken from the binomial
/// closed form of the delayed exponential of `D = A^{−1} B A^{−m}`.
///
/// Agrees with [`solve_nonhomogeneous_rep`] when `A B = B A`.
pub fn solve_permutable_rep(system: &DelaySystem, k_max: usize) -> Result<Trajectory> {
    let b = system.b().constant_value().ok_or_else(|| {
        Error::Unsupported("the binomial closed form needs a constant delay matrix".into())
    })?;
    let m = system.delay();
    let mi = m as i64;
    let powers = PowerCache::new(system.a())?;
    let d = powers.inverse() * b * powers.power(-mi);
    let n = system.dim();
    let phi_at = |k: i64| -> Result<Matrix> {
        if k < -mi {
            Ok(linalg::zeros(n))
        } else if k <= 0 {
            Ok(powers.power(k))
        } else {
            Ok(powers.power(k) * delayed_exp_permutable(&d, m, k)?)
        }
    };
    let phi = system.phi();
    let a = system.a();
    let kernel = |j: i64, k: i64, w: &Vector| -> Result<Vector> {
        Ok(powers.power(mi + j) * (phi_at(k - mi - j)? * powers.apply(-j, w)))
    };
    let mut states = Vec::with_capacity(k_max + m + 1);
    for k in -mi..=k_max as i64 {
        let mut x = kernel(-mi, k, phi.at(-mi))?;
        for j in -mi + 1..=0 {
            x += kernel(j, k, &(phi.at(j) - a * phi.at(j - 1)))?;
        }
        for j in 1..=k {
            x += kernel(j, k, system.f().lookup(j as usize - 1))?;
        }
        check_state(k, &x)?;
        states.push(x);
    }
    Trajectory::new(m, k_max, states)
}

/// `z(k) = A^{−k} x(k)`.
pub fn to_z_trajectory(system: &DelaySystem, x: &Trajectory) -> Result<Trajectory> {
    check_dims(system, x)?;
    let powers = PowerCache::new(system.a())?;
    Ok(x.map(|k, v| powers.apply(-k, v)))
}

/// `x(k) = A^k z(k)`.
pub fn from_z_trajectory(system: &DelaySystem, z: &Trajectory) -> Result<Trajectory> {
    check_dims(system, z)?;
    let powers = PowerCache::new(system.a())?;
    Ok(z.map(|k, v| powers.apply(k, v)))
}

fn check_dims(system: &DelaySystem, x: &Trajectory) -> Result<()> {
    if x.dim() != system.dim() || x.delay() != system.delay() {
        return Err(Error::ShapeMismatch(format!(
            "trajectory has n = {}, m = {}; system has n = {}, m = {}",
            x.dim(),
            x.delay(),
            system.dim(),
            system.delay()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepError {
    pub k: i64,
    pub abs_err: f64,
    pub rel_err: f64,
}

/// Per-step error metrics between two trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub steps: Vec<StepError>,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub first_failure: Option<i64>,
    pub pass: bool,
}

/// Compare `a` against the reference `b`; the relative error at each step divides by
/// `max(1, ‖b(k)‖∞)`.
pub fn compare(a: &Trajectory, b: &Trajectory, tol: f64) -> Result<ComparisonReport> {
    if a.delay() != b.delay() || a.k_max() != b.k_max() || a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!(
            "(m, k_max, n) = ({}, {}, {}) vs ({}, {}, {})",
            a.delay(),
            a.k_max(),
            a.dim(),
            b.delay(),
            b.k_max(),
            b.dim()
        )));
    }
    let steps: Vec<StepError> = a
        .iter()
        .zip(b.iter())
        .map(|((k, x), (_, y))| {
            let abs_err = linalg::max_abs((x - y).iter().cloned());
            let rel_err = abs_err / linalg::max_abs(y.iter().cloned()).max(1.0);
            StepError {
                k,
                abs_err,
                rel_err,
            }
        })
        .collect();
    let max_abs_err = steps.iter().map(|s| s.abs_err).fold(0.0, f64::max);
    let max_rel_err = steps.iter().map(|s| s.rel_err).fold(0.0, f64::max);
    let first_failure = steps
        .iter()
        .find(|s| s.rel_err.is_nan() || s.rel_err > tol)
        .map(|s| s.k);
    Ok(ComparisonReport {
        pass: first_failure.is_none(),
        steps,
        max_abs_err,
        max_rel_err,
        tolerance: tol,
        first_failure,
    })
}
