//! Batch front end shared by the `ddelay` binary and the tests.
//!
//! Exit codes: 0 success, 1 failed check or comparison (or a diverging run),
//! 2 parse, validation or I/O errors.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::bench::{run_bench, write_bench, BenchConfig};
use crate::check::{check_random, check_system, CheckConfig};
use crate::csv_io;
use crate::error::{Error, Result};
use crate::fundamental::{fundamental_phi, phi_oracle};
use crate::solver::{compare, solve_nonhomogeneous_rep_with, solve_recursion, Formula};
use crate::system::{validate_system, DelaySystem, RawSystem, ValidationOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Solve,
    Fundamental,
    Check,
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Method {
    #[default]
    Representation,
    Recursion,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum FormulaArg {
    #[default]
    Shifted,
    Unshifted,
    FlippedSign,
}

impl From<FormulaArg> for Formula {
    fn from(f: FormulaArg) -> Self {
        match f {
            FormulaArg::Shifted => Formula::Shifted,
            FormulaArg::Unshifted => Formula::Unshifted,
            FormulaArg::FlippedSign => Formula::FlippedSign,
        }
    }
}

/// Solve and verify linear discrete delay systems x(k+1) = A x(k) + B_k x(k-m) + f(k).
#[derive(Debug, Clone, Parser)]
#[command(name = "ddelay", version)]
pub struct RunConfig {
    /// What to run.
    #[arg(value_enum)]
    pub command: Command,

    /// System JSON file.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Output CSV (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Diff CSV for `--method both` (defaults to `<output>.diff.csv`).
    #[arg(long)]
    pub diff: Option<PathBuf>,

    #[arg(long, default_value_t = 60)]
    pub k_max: usize,

    #[arg(long, value_enum, default_value_t = Method::Representation)]
    pub method: Method,

    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,

    /// Use randomly generated systems (check, bench).
    #[arg(long)]
    pub random: bool,

    #[arg(long, default_value_t = 25)]
    pub trials: usize,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Representation kernel.
    #[arg(long, value_enum, default_value_t = FormulaArg::Shifted)]
    pub formula: FormulaArg,

    /// Reciprocal condition threshold for accepting A.
    #[arg(long, default_value_t = crate::linalg::DEFAULT_RCOND_THRESHOLD)]
    pub rcond_threshold: f64,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            input: None,
            output: None,
            diff: None,
            k_max: 60,
            method: Method::Representation,
            tol: 1e-9,
            random: false,
            trials: 25,
            seed: 42,
            formula: FormulaArg::Shifted,
            rcond_threshold: crate::linalg::DEFAULT_RCOND_THRESHOLD,
        }
    }
}

enum Failure {
    Check(String),
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Overflow { .. } | Error::ShapeMismatch(_) | Error::WorkBudgetExceeded { .. } => 1,
        _ => 2,
    }
}

/// Run one command; messages go to `log`, CSV to `--output` or `stdout`.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write, log: &mut dyn Write) -> i32 {
    let outcome = match cfg.command {
        Command::Solve => solve(cfg, stdout, log),
        Command::Fundamental => fundamental(cfg, stdout, log),
        Command::Check => check(cfg, stdout),
        Command::Bench => bench(cfg, stdout),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Check(msg)) => {
            let _ = writeln!(log, "{msg}");
            1
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(log, "error: {msg}");
            2
        }
        Err(Failure::Run(err)) => {
            let _ = writeln!(log, "error: {err}");
            exit_code(&err)
        }
    }
}

pub fn load_system(path: &Path, opts: ValidationOptions) -> Result<DelaySystem> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let raw = RawSystem::from_json(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    validate_system(&raw, opts)
}

fn input_system(cfg: &RunConfig) -> std::result::Result<DelaySystem, Failure> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Failure::Usage(format!("{:?} needs --input", cfg.command).to_lowercase()))?;
    let opts = ValidationOptions {
        rcond_threshold: cfg.rcond_threshold,
    };
    Ok(load_system(path, opts)?)
}

fn with_output(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let mut file = BufWriter::new(File::create(p)?);
            body(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => body(stdout),
    }
}

fn diff_path(cfg: &RunConfig) -> Option<PathBuf> {
    cfg.diff.clone().or_else(|| {
        cfg.output.as_ref().map(|p| {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            p.with_file_name(format!("{stem}.diff.csv"))
        })
    })
}

fn check_tol(cfg: &RunConfig) -> std::result::Result<(), Failure> {
    if cfg.tol > 0.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "--tol must be positive, got {}",
            cfg.tol
        )))
    }
}

fn solve(
    cfg: &RunConfig,
    stdout: &mut dyn Write,
    log: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    check_tol(cfg)?;
    let system = input_system(cfg)?;
    let formula = Formula::from(cfg.formula);
    let trajectory = match cfg.method {
        Method::Recursion => solve_recursion(&system, cfg.k_max)?,
        Method::Representation | Method::Both => {
            solve_nonhomogeneous_rep_with(&system, cfg.k_max, formula)?
        }
    };
    with_output(cfg.output.as_deref(), stdout, |w| {
        csv_io::write_trajectory(w, &trajectory)
    })?;
    if cfg.method == Method::Both {
        let oracle = solve_recursion(&system, cfg.k_max)?;
        let report = compare(&trajectory, &oracle, cfg.tol)?;
        if let Some(path) = diff_path(cfg) {
            with_output(Some(&path), stdout, |w| csv_io::write_diff(w, &report))?;
        }
        let verdict = format!(
            "representation vs recursion: max abs err {:.3e}, max rel err {:.3e}, tol {:.0e}: {}",
            report.max_abs_err,
            report.max_rel_err,
            cfg.tol,
            if report.pass { "PASS" } else { "FAIL" }
        );
        if !report.pass {
            let first = report
                .first_failure
                .map_or(String::new(), |k| format!(" (first failing k = {k})"));
            return Err(Failure::Check(format!("{verdict}{first}")));
        }
        let _ = writeln!(log, "{verdict}");
    }
    Ok(())
}

fn fundamental(
    cfg: &RunConfig,
    stdout: &mut dyn Write,
    log: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    check_tol(cfg)?;
    let system = input_system(cfg)?;
    let phi = match cfg.method {
        Method::Recursion => phi_oracle(&system, cfg.k_max)?,
        Method::Representation | Method::Both => fundamental_phi(&system, cfg.k_max)?,
    };
    with_output(cfg.output.as_deref(), stdout, |w| {
        csv_io::write_fundamental(w, &phi)
    })?;
    if cfg.method == Method::Both {
        let oracle = phi_oracle(&system, cfg.k_max)?;
        let err = (-(system.delay() as i64)..=cfg.k_max as i64)
            .map(|k| crate::linalg::rel_diff(phi.at(k), oracle.at(k), &[]))
            .fold(0.0, f64::max);
        let pass = err <= cfg.tol;
        let verdict = format!(
            "closed form vs recursion: max rel err {err:.3e}, tol {:.0e}: {}",
            cfg.tol,
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            return Err(Failure::Check(verdict));
        }
        let _ = writeln!(log, "{verdict}");
    }
    Ok(())
}

fn check(cfg: &RunConfig, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    check_tol(cfg)?;
    let check_cfg = CheckConfig {
        trials: cfg.trials,
        seed: cfg.seed,
        k_max: cfg.k_max,
        tol: cfg.tol,
        formula: cfg.formula.into(),
    };
    let report = if cfg.random {
        check_random(&check_cfg)?
    } else {
        let system = input_system(cfg)?;
        check_system(&system, &check_cfg)?
    };
    let _ = write!(stdout, "{}", report.render());
    if report.all_pass() {
        let _ = writeln!(stdout, "all invariants pass");
        Ok(())
    } else {
        Err(Failure::Check("one or more invariants failed".into()))
    }
}

fn bench(cfg: &RunConfig, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let bench_cfg = BenchConfig {
        seed: cfg.seed,
        ..BenchConfig::default()
    };
    let rows = run_bench(&bench_cfg)?;
    with_output(cfg.output.as_deref(), stdout, |w| write_bench(w, &rows))?;
    Ok(())
}

/// Entry point for the binary.
pub fn main_with_args() -> i32 {
    let cfg = RunConfig::parse();
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(&cfg, &mut stdout.lock(), &mut stderr.lock())
}
