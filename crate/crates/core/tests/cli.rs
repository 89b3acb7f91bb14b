use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use discrete_delay::csv_io::read_trajectory;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn ddelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddelay"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn column_max(csv: &str, col: usize) -> f64 {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max)
}

#[test]
fn solve_both_on_undelayed_system() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let input = data("undelayed.json");
    let run = ddelay(&[
        "solve",
        "--input",
        path_str(&input),
        "--method",
        "both",
        "--k-max",
        "40",
        "--output",
        path_str(&out),
    ]);
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let diff = std::fs::read_to_string(dir.path().join("x.diff.csv")).unwrap();
    assert!(diff.starts_with("k,abs_err,rel_err\n"));
    assert_eq!(diff.lines().count(), 1 + 42);
    assert!(column_max(&diff, 2) <= 1e-12);
}

#[test]
fn solve_writes_delayed_fibonacci_values() {
    let input = data("delayed_fibonacci.json");
    for method in ["representation", "recursion"] {
        let run = ddelay(&[
            "solve",
            "--input",
            path_str(&input),
            "--method",
            method,
            "--k-max",
            "6",
        ]);
        assert_eq!(run.status.code(), Some(0));
        let x = read_trajectory(&String::from_utf8(run.stdout).unwrap()).unwrap();
        let values: Vec<f64> = (0..=6).map(|k| x.at(k)[0]).collect();
        assert_eq!(values, [1.0, 2.0, 3.0, 4.0, 6.0, 9.0, 13.0], "{method}");
    }
}

#[test]
fn singular_a_is_a_validation_error() {
    let input = data("singular_a.json");
    let run = ddelay(&["solve", "--input", path_str(&input)]);
    assert_eq!(run.status.code(), Some(2));
    let msg = String::from_utf8(run.stderr).unwrap();
    assert!(msg.contains("matrix A"), "{msg}");
    assert!(msg.contains("threshold 1e-12"), "{msg}");
}

#[test]
fn parse_errors_report_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        "{\n  \"n\": 1,\n  \"m\": 1,\n  \"A\": [[1.0]]\n  \"B\": {}\n}\n",
    )
    .unwrap();
    let run = ddelay(&["solve", "--input", path_str(&bad)]);
    assert_eq!(run.status.code(), Some(2));
    let msg = String::from_utf8(run.stderr).unwrap();
    assert!(msg.contains("line 5"), "{msg}");

    std::fs::write(&bad, r#"{"n": 1, "m": 1, "A": [[1.0]], "B": {"tail": [[0.0]]}, "phi": [[1.0], [1.0]], "extra": 1}"#).unwrap();
    let run = ddelay(&["solve", "--input", path_str(&bad)]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8(run.stderr).unwrap().contains("extra"));
}

#[test]
fn missing_input_is_a_usage_error() {
    let run = ddelay(&["solve"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8(run.stderr).unwrap().contains("--input"));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let input = data("noncommuting.json");
    let args = ["solve", "--input", path_str(&input), "--k-max", "25"];
    let first = ddelay(&args);
    let second = ddelay(&args);
    assert_eq!(first.status.code(), Some(0));
    assert!(!first.stdout.is_empty());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn flipped_sign_kernel_fails_comparison_on_noncommuting_system() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let input = data("noncommuting.json");
    let base = [
        "solve",
        "--input",
        path_str(&input),
        "--method",
        "both",
        "--output",
        path_str(&out),
    ];
    assert_eq!(ddelay(&base).status.code(), Some(0));
    let mut flipped = base.to_vec();
    flipped.extend(["--formula", "flipped-sign"]);
    let run = ddelay(&flipped);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8(run.stderr)
        .unwrap()
        .contains("first failing k"));
}

#[test]
fn fundamental_csv_layout() {
    let input = data("delayed_fibonacci.json");
    let run = ddelay(&[
        "fundamental",
        "--input",
        path_str(&input),
        "--k-max",
        "6",
        "--method",
        "both",
    ]);
    assert_eq!(run.status.code(), Some(0));
    let csv = String::from_utf8(run.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,row,col,value"));
    let rows: Vec<(i64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!((f[1], f[2]), ("1", "1"));
            (f[0].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    let expected = [1.0, 1.0, 1.0, 2.0, 3.0, 4.0, 6.0, 9.0, 13.0];
    assert_eq!(rows, (-2..=6).zip(expected).collect::<Vec<_>>());
}

#[test]
fn check_on_file_system_passes() {
    let input = data("noncommuting.json");
    let run = ddelay(&["check", "--input", path_str(&input), "--k-max", "40"]);
    let out = String::from_utf8(run.stdout).unwrap();
    assert_eq!(run.status.code(), Some(0), "{out}");
    assert_eq!(out.lines().filter(|l| l.ends_with("PASS")).count(), 8);
}

#[test]
fn check_random_is_deterministic() {
    let args = [
        "check", "--random", "--seed", "3", "--trials", "2", "--k-max", "20",
    ];
    let first = ddelay(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, ddelay(&args).stdout);
}

#[test]
fn bench_writes_timing_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    let run = ddelay(&["bench", "--random", "--output", path_str(&out)]);
    assert_eq!(run.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("n,m,k,method,seconds\n"));
    for method in ["p_direct", "p_table", "recursion"] {
        assert!(csv.contains(&format!(",{method},")), "{method}");
    }
}
