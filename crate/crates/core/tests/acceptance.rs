//! Acceptance suite. Prints one line per criterion and exits non-zero if any fails.

use std::process::Command;
use std::time::Instant;

use discrete_delay::check::{
    difference_relation_error, nested_sum_count_mismatches, nested_sum_recurrence_error,
    permutable_reduction_error, table_vs_direct_error,
};
use discrete_delay::fundamental::FundamentalBuilder;
use discrete_delay::linalg;
use discrete_delay::random::{self, random_permutable_system, random_sequence, random_system};
use discrete_delay::{
    compare, solve_homogeneous_rep, solve_nonhomogeneous_rep, solve_recursion, DelaySystem,
    Formula, InitialFunction, Matrix, MatrixSequence, Result, Vector, VectorSequence,
};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Criterion = fn() -> Result<Outcome>;

fn within(err: f64, tol: f64) -> bool {
    !err.is_nan() && err <= tol
}

fn representation_vs_recursion() -> Result<Outcome> {
    const SYSTEMS: usize = 100;
    const K_MAX: usize = 60;
    const TOL: f64 = 1e-9;
    let start = Instant::now();
    let mut rng = random::seeded(2024);
    let mut worst = 0.0f64;
    for _ in 0..SYSTEMS {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(1..=5);
        let sys = random_system(&mut rng, n, m);
        let rep = solve_nonhomogeneous_rep(&sys, K_MAX)?;
        let truth = solve_recursion(&sys, K_MAX)?;
        let err = compare(&rep, &truth, TOL)?.max_rel_err;
        worst = if err.is_nan() {
            f64::NAN
        } else {
            worst.max(err)
        };
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(outcome(
        within(worst, TOL) && secs < 30.0,
        format!("{SYSTEMS} systems, k <= {K_MAX}: max rel err {worst:.2e} (tol {TOL:.0e}), {secs:.2} s (limit 30 s)"),
    ))
}

fn nested_sum_identity() -> Result<Outcome> {
    const TOL: f64 = 1e-12;
    let mut rng = random::seeded(7);
    let mut rec = 0.0f64;
    let mut table = 0.0f64;
    let mut grids = 0;
    for m in 1..=4 {
        for n in 1..=3 {
            let generic = random_sequence(&mut rng, n, 12);
            rec = rec.max(nested_sum_recurrence_error(&generic, m, 20)?);
            table = table.max(table_vs_direct_error(&generic, m, 20)?);
            let sys = random_system(&mut rng, n, m);
            let builder = FundamentalBuilder::new(&sys, 22)?;
            let d = builder.d_sequence();
            rec = rec.max(nested_sum_recurrence_error(d, m, 20)?);
            table = table.max(table_vs_direct_error(d, m, 20)?);
            grids += 2;
        }
    }
    Ok(outcome(
        within(rec, TOL) && within(table, TOL),
        format!("{grids} grids, k <= 20: recurrence {rec:.2e}, table vs direct {table:.2e} (tol {TOL:.0e})"),
    ))
}

fn difference_relation() -> Result<Outcome> {
    const TOL: f64 = 1e-12;
    let mut rng = random::seeded(11);
    let mut worst = 0.0f64;
    let mut boundaries = 0;
    for m in 1..=5usize {
        boundaries += 40 / (m + 1) + 1;
        for n in 1..=4 {
            let generic = random_sequence(&mut rng, n, 2 * (m + 1) + 3);
            worst = worst.max(difference_relation_error(&generic, m, 40));
            let sys = random_system(&mut rng, n, m);
            let builder = FundamentalBuilder::new(&sys, 41)?;
            worst = worst.max(difference_relation_error(builder.d_sequence(), m, 40));
        }
    }
    Ok(outcome(
        within(worst, TOL),
        format!("0 <= k <= 40, m <= 5 ({boundaries} block boundaries): max rel err {worst:.2e} (tol {TOL:.0e})"),
    ))
}

fn fundamental_matrix() -> Result<Outcome> {
    const TOL: f64 = 1e-9;
    let mut rng = random::seeded(13);
    let mut worst = 0.0f64;
    let mut d_form_best = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(1..=5);
        let sys = random_system(&mut rng, n, m);
        let builder = FundamentalBuilder::new(&sys, 60)?;
        let phi = builder.phi()?;
        let powers = builder.powers();
        let initial = (-(m as i64)..=0)
            .map(|k| linalg::rel_diff(phi.at(k), &powers.power(k), &[]))
            .fold(0.0, f64::max);
        worst = worst.max(phi.residual(sys.a(), sys.b(), 0)).max(initial);
        d_form_best = d_form_best.max(phi.residual(sys.a(), builder.d_sequence(), 0));
    }
    Ok(outcome(
        within(worst, TOL) && d_form_best > 1e-3,
        format!("20 systems, k <= 60: residual and initial segment {worst:.2e} (tol {TOL:.0e}); D_k-coefficient residual {d_form_best:.2e} (must fail)"),
    ))
}

fn count_identity() -> Result<Outcome> {
    let (mismatches, checked) = nested_sum_count_mismatches(25, 5)?;
    Ok(outcome(
        mismatches == 0 && checked > 0,
        format!("{checked} triples, k <= 25, m <= 5: {mismatches} mismatches"),
    ))
}

fn permutable_reduction() -> Result<Outcome> {
    const TOL: f64 = 1e-10;
    let mut rng = random::seeded(17);
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(1..=5);
        let sys = random_permutable_system(&mut rng, n, m);
        let err = permutable_reduction_error(&sys, 60, Formula::Shifted)?;
        worst = if err.is_nan() {
            f64::NAN
        } else {
            worst.max(err)
        };
    }
    Ok(outcome(
        within(worst, TOL),
        format!("30 systems, B quadratic in A, k <= 60: max rel err {worst:.2e} (tol {TOL:.0e})"),
    ))
}

fn scalar_hand_check() -> Result<Outcome> {
    let one = || Matrix::from_element(1, 1, 1.0);
    let sys = DelaySystem::new(
        one(),
        2,
        MatrixSequence::constant(one()),
        VectorSequence::zero(1),
        InitialFunction::constant(2, Vector::from_element(1, 1.0)),
    )?;
    let expected = [1.0, 2.0, 3.0, 4.0, 6.0, 9.0, 13.0];
    let routes = [
        ("recursion", solve_recursion(&sys, 6)?),
        (
            "homogeneous representation",
            solve_homogeneous_rep(&sys, 6)?,
        ),
        ("representation", solve_nonhomogeneous_rep(&sys, 6)?),
    ];
    let mut bad = Vec::new();
    for (name, x) in &routes {
        let got: Vec<f64> = (0..=6).map(|k| x.at(k)[0]).collect();
        if got != expected {
            bad.push(format!("{name} gave {got:?}"));
        }
    }
    Ok(outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "x(0..6) = 1,2,3,4,6,9,13 exactly by recursion and representation".into()
        } else {
            bad.join("; ")
        },
    ))
}

fn cli_contract() -> Result<Outcome> {
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_ddelay"))
            .args(["check", "--random", "--seed", "42", "--trials", "25"])
            .args(extra)
            .output()
            .map(|o| o.status.code())
    };
    let clean = run(&[])?;
    let mutated = run(&["--formula", "flipped-sign"])?;
    Ok(outcome(
        clean == Some(0) && mutated == Some(1),
        format!(
            "check exit {clean:?} (want 0); with sign-corrupted kernel exit {mutated:?} (want 1)"
        ),
    ))
}

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        (
            "representation matches recursion",
            representation_vs_recursion,
        ),
        ("nested-sum difference identity", nested_sum_identity),
        (
            "delayed exponential difference relation",
            difference_relation,
        ),
        ("fundamental matrix", fundamental_matrix),
        ("nested-sum count", count_identity),
        ("permutable reduction", permutable_reduction),
        ("scalar hand check", scalar_hand_check),
        ("cli contract", cli_contract),
    ];
    let mut failures = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let result = criterion().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        if !result.pass {
            failures += 1;
        }
        println!(
            "[{}] criterion {}: {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
