//! The invariant suite behind `ddelay check`: every identity the representation rests
//! on, evaluated on given or randomly generated systems.

use std::fmt::Write as _;

use rand::Rng;

use crate::delayed_exp::{
    binomial, block_index, delayed_exp_permutable, nested_sum_count, p_direct, p_table,
};
use crate::error::Result;
use crate::fundamental::{phi_oracle, FundamentalBuilder};
use crate::linalg::{self, PowerCache};
use crate::random;
use crate::solver::{
    compare, solve_nonhomogeneous_rep_with, solve_permutable_rep, solve_recursion, Formula,
};
use crate::system::{DelaySystem, MatrixFamily, MatrixSequence};

/// Tolerance for the purely algebraic identities on the delayed exponential.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for the permutable reduction.
pub const PERMUTABLE_TOL: f64 = 1e-10;
/// Horizon of the nested-sum identity checks (the direct evaluator is exponential).
pub const DIRECT_K_MAX: i64 = 20;
/// Horizon of the difference-relation check.
pub const DIFFERENCE_K_MAX: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub trials: usize,
    pub seed: u64,
    pub k_max: usize,
    pub tol: f64,
    pub formula: Formula,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            trials: 25,
            seed: 42,
            k_max: 60,
            tol: 1e-9,
            formula: Formula::Shifted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    NestedSumRecurrence,
    TableMatchesDirect,
    DifferenceRelation,
    FundamentalRecursion,
    FundamentalOracle,
    RepresentationOracle,
    PermutableReduction,
    NestedSumCount,
}

impl Invariant {
    pub const ALL: [Invariant; 8] = [
        Invariant::NestedSumRecurrence,
        Invariant::TableMatchesDirect,
        Invariant::DifferenceRelation,
        Invariant::FundamentalRecursion,
        Invariant::FundamentalOracle,
        Invariant::RepresentationOracle,
        Invariant::PermutableReduction,
        Invariant::NestedSumCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Invariant::NestedSumRecurrence => "nested-sum-recurrence",
            Invariant::TableMatchesDirect => "table-matches-direct",
            Invariant::DifferenceRelation => "difference-relation",
            Invariant::FundamentalRecursion => "fundamental-recursion",
            Invariant::FundamentalOracle => "fundamental-vs-oracle",
            Invariant::RepresentationOracle => "representation-vs-recursion",
            Invariant::PermutableReduction => "permutable-reduction",
            Invariant::NestedSumCount => "nested-sum-count",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantResult {
    pub invariant: Invariant,
    pub cases: usize,
    pub max_err: f64,
    pub tolerance: f64,
}

impl InvariantResult {
    fn new(invariant: Invariant, tolerance: f64) -> Self {
        Self {
            invariant,
            cases: 0,
            max_err: 0.0,
            tolerance,
        }
    }

    fn record(&mut self, err: f64) {
        self.cases += 1;
        // NaN poisons the maximum.
        self.max_err = if err.is_nan() || self.max_err.is_nan() {
            f64::NAN
        } else {
            self.max_err.max(err)
        };
    }

    pub fn pass(&self) -> bool {
        self.max_err <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub results: Vec<InvariantResult>,
}

impl CheckReport {
    fn new(cfg: &CheckConfig) -> Self {
        let results = Invariant::ALL
            .into_iter()
            .map(|inv| {
                let tol = match inv {
                    Invariant::NestedSumRecurrence
                    | Invariant::TableMatchesDirect
                    | Invariant::DifferenceRelation => ALGEBRAIC_TOL,
                    Invariant::PermutableReduction => PERMUTABLE_TOL,
                    Invariant::NestedSumCount => 0.0,
                    _ => cfg.tol,
                };
                InvariantResult::new(inv, tol)
            })
            .collect();
        Self { results }
    }

    fn entry(&mut self, inv: Invariant) -> &mut InvariantResult {
        self.results
            .iter_mut()
            .find(|r| r.invariant == inv)
            .expect("every invariant has a slot")
    }

    pub fn get(&self, inv: Invariant) -> &InvariantResult {
        self.results
            .iter()
            .find(|r| r.invariant == inv)
            .expect("every invariant has a slot")
    }

    pub fn all_pass(&self) -> bool {
        self.results.iter().all(InvariantResult::pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<30} {:>6} {:>12} {:>10}  result",
            "invariant", "cases", "max_err", "tol"
        );
        for r in &self.results {
            let _ = writeln!(
                out,
                "{:<30} {:>6} {:>12.3e} {:>10.0e}  {}",
                r.invariant.name(),
                r.cases,
                r.max_err,
                r.tolerance,
                if r.pass() { "PASS" } else { "FAIL" }
            );
        }
        out
    }
}

/// First-difference identity of the nested sums, evaluated with the direct
/// evaluator on every admissible `(k, d)` with `k ≤ k_max`. Returns the largest error.
pub fn nested_sum_recurrence_error<F: MatrixFamily>(seq: &F, m: usize, k_max: i64) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in 1..=k_max {
        for d in 1..=block_index(k, m)? {
            let next = p_direct(seq, m, k + 1, d)?;
            let here = p_direct(seq, m, k, d)?;
            let rhs = seq.at(k as usize).as_ref() * p_direct(seq, m, k - m as i64, d - 1)?;
            let lhs = &next - &here;
            worst = worst.max(linalg::rel_diff(&lhs, &rhs, &[&next, &here]));
        }
    }
    Ok(worst)
}

/// Largest difference between table and direct evaluation on the admissible grid.
pub fn table_vs_direct_error<F: MatrixFamily>(seq: &F, m: usize, k_max: i64) -> Result<f64> {
    let table = p_table(seq, m, k_max as usize);
    let mut worst = 0.0f64;
    for k in 0..=k_max {
        let top = if k == 0 { 1 } else { block_index(k, m)? + 1 };
        for d in 0..=top {
            let direct = p_direct(seq, m, k, d)?;
            worst = worst.max(linalg::rel_diff(&table.get(k, d), &direct, &[]));
        }
    }
    Ok(worst)
}

/// Largest residual of `e(k+1) − e(k) = D_k e(k−m)` for `0 ≤ k ≤ k_max`.
pub fn difference_relation_error<F: MatrixFamily>(seq: &F, m: usize, k_max: usize) -> f64 {
    let table = p_table(seq, m, k_max + 1);
    (0..=k_max as i64)
        .map(|k| {
            let next = table.delayed_exp(k + 1);
            let here = table.delayed_exp(k);
            let rhs = seq.at(k as usize).as_ref() * table.delayed_exp(k - m as i64);
            linalg::rel_diff(&(&next - &here), &rhs, &[&next, &here])
        })
        .fold(0.0, f64::max)
}

/// Number of `(m, k, d)` with `k ≤ k_max`, `m ≤ m_max` where enumeration and
/// `C(k − (d−1)m, d)` disagree, and the number of triples checked.
pub fn nested_sum_count_mismatches(k_max: i64, m_max: usize) -> Result<(usize, usize)> {
    let mut mismatches = 0;
    let mut checked = 0;
    for m in 1..=m_max {
        for k in 1..=k_max {
            for d in 1..=block_index(k, m)? {
                checked += 1;
                let closed = binomial((k - (d as i64 - 1) * m as i64) as u64, d as u64)?;
                if nested_sum_count(m, k, d) != closed {
                    mismatches += 1;
                }
            }
        }
    }
    Ok((mismatches, checked))
}

fn check_one<R: Rng + ?Sized>(
    system: &DelaySystem,
    cfg: &CheckConfig,
    rng: &mut R,
    report: &mut CheckReport,
) -> Result<()> {
    let m = system.delay();
    let k_max = cfg.k_max;
    let builder = FundamentalBuilder::new(system, k_max.max(DIFFERENCE_K_MAX + 1))?;
    let d = builder.d_sequence();

    report
        .entry(Invariant::NestedSumRecurrence)
        .record(nested_sum_recurrence_error(d, m, DIRECT_K_MAX)?);
    report
        .entry(Invariant::TableMatchesDirect)
        .record(table_vs_direct_error(d, m, DIRECT_K_MAX + 1)?);
    report
        .entry(Invariant::DifferenceRelation)
        .record(difference_relation_error(d, m, DIFFERENCE_K_MAX));

    let builder = FundamentalBuilder::new(system, k_max)?;
    let phi = builder.phi()?;
    let powers = PowerCache::new(system.a())?;
    let initial = (-(m as i64)..=0)
        .map(|k| linalg::rel_diff(phi.at(k), &powers.power(k), &[]))
        .fold(0.0, f64::max);
    report
        .entry(Invariant::FundamentalRecursion)
        .record(phi.residual(system.a(), system.b(), 0).max(initial));
    let oracle = phi_oracle(system, k_max)?;
    let vs_oracle = (-(m as i64) - 1..=k_max as i64)
        .map(|k| linalg::rel_diff(phi.at(k), oracle.at(k), &[]))
        .fold(0.0, f64::max);
    report.entry(Invariant::FundamentalOracle).record(vs_oracle);

    let truth = solve_recursion(system, k_max)?;
    let rep = solve_nonhomogeneous_rep_with(system, k_max, cfg.formula)?;
    report
        .entry(Invariant::RepresentationOracle)
        .record(compare(&rep, &truth, cfg.tol)?.max_rel_err);

    let permutable = random::permutable_variant(rng, system.a(), system);
    report
        .entry(Invariant::PermutableReduction)
        .record(permutable_reduction_error(&permutable, k_max, cfg.formula)?);
    Ok(())
}

/// For a system with constant `B` commuting with `A`: the largest of
/// (sequence-based vs closed-form delayed exponential), (representation vs the
/// closed-form representation) and (closed-form representation vs recursion).
pub fn permutable_reduction_error(
    system: &DelaySystem,
    k_max: usize,
    formula: Formula,
) -> Result<f64> {
    let m = system.delay();
    let builder = FundamentalBuilder::new(system, k_max)?;
    let constant_d = builder.d_sequence().at(0).into_owned();
    let table = p_table(&MatrixSequence::constant(constant_d.clone()), m, k_max);
    let mut worst = 0.0f64;
    for k in -(m as i64) - 1..=k_max as i64 {
        let closed = delayed_exp_permutable(&constant_d, m, k)?;
        worst = worst.max(linalg::rel_diff(&table.delayed_exp(k), &closed, &[]));
    }
    let truth = solve_recursion(system, k_max)?;
    let closed_rep = solve_permutable_rep(system, k_max)?;
    let rep = solve_nonhomogeneous_rep_with(system, k_max, formula)?;
    worst = worst
        .max(compare(&rep, &closed_rep, 0.0)?.max_rel_err)
        .max(compare(&closed_rep, &truth, 0.0)?.max_rel_err);
    Ok(worst)
}

fn count_check(report: &mut CheckReport) -> Result<()> {
    let (mismatches, checked) = nested_sum_count_mismatches(25, 5)?;
    let entry = report.entry(Invariant::NestedSumCount);
    entry.cases = checked;
    entry.max_err = mismatches as f64;
    Ok(())
}

/// Run the suite on one given system; the permutable case is derived from its `A`.
pub fn check_system(system: &DelaySystem, cfg: &CheckConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new(cfg);
    let mut rng = random::seeded(cfg.seed);
    check_one(system, cfg, &mut rng, &mut report)?;
    count_check(&mut report)?;
    Ok(report)
}

/// Run the suite on `cfg.trials` random systems, `n ∈ {2,3,4}`, `m ∈ {1,…,5}`.
pub fn check_random(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new(cfg);
    let mut rng = random::seeded(cfg.seed);
    for _ in 0..cfg.trials {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(1..=5);
        let system = random::random_system(&mut rng, n, m);
        check_one(&system, cfg, &mut rng, &mut report)?;
    }
    count_check(&mut report)?;
    Ok(report)
}
