use std::path::Path;
use std::process::{Command, Output};

use hipea::cli::{load_report, SolveReport};
use hipea::extraction::Algorithm;

fn hipea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hipea")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solves_the_builtin_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let csv = dir.path().join("table.csv");
    let out = hipea(&[
        "solve",
        "demo",
        "--algorithm",
        "hipea1",
        "--exact",
        "--out",
        json.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let report = load_report(&json).unwrap();
    let run = report.run(Algorithm::Hipea1).unwrap().hipea.as_ref().unwrap();
    assert!(run.epsilon < 1e-10);
    assert_eq!(run.experiments.len(), 4);

    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("experiment,iteration,ancilla,omega,outcome,probability"));
    assert_eq!(lines.next(), Some("1,1,1,-2pi(0.0),0,0.05260"));
    assert!(table.lines().any(|l| l == "1,2,1,-2pi(0.00),00,0.03330"));
}

#[test]
fn report_goes_to_stdout_and_round_trips() {
    let out = hipea(&["solve", "demo", "--exact"]);
    assert_eq!(code(&out), 0);
    let report = SolveReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.runs.len(), 4);
    let hhl = report.run(Algorithm::Hhl).unwrap().hhl.as_ref().unwrap();
    assert!(hhl.normalized_difference < 1e-6);
}

#[test]
fn tampered_epsilon_is_rejected() {
    let out = hipea(&["solve", "demo", "--algorithm", "hipea3", "--exact"]);
    let mut value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    value["runs"][0]["hipea"]["epsilon"] = serde_json::json!(0.5);
    assert!(SolveReport::from_json(&value.to_string()).is_err());
}

#[test]
fn multiple_runs_split_csv_per_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = hipea(&["solve", "demo", "--exact", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    for name in ["t-hipea1.csv", "t-hipea2.csv", "t-hipea3.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn hhl_only_csv_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = hipea(&["solve", "demo", "--algorithm", "hhl", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read_to_string(csv).unwrap(), "experiment,iteration,ancilla,omega,outcome,probability\n");
}

#[test]
fn sampled_runs_repeat_byte_for_byte() {
    let args = ["solve", "demo", "--algorithm", "hipea2", "--shots", "5000", "--seed", "9"];
    let a = hipea(&args);
    let b = hipea(&args);
    let mut serial = args.to_vec();
    serial.push("--serial");
    let c = hipea(&serial);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn matrix_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "p.json", r#"{"m": 3, "matrix": [[0.5, 0.125], [0.125, 0.5]], "b": [0.6, 0.8]}"#);
    let out = hipea(&["solve", &path, "--algorithm", "hipea1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = SolveReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(report.run(Algorithm::Hipea1).unwrap().hipea.as_ref().unwrap().epsilon < 1e-10);
}

#[test]
fn validation_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    assert_eq!(code(&hipea(&["solve", missing.to_str().unwrap()])), 2);

    let garbage = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(code(&hipea(&["solve", &garbage])), 2);

    let degenerate = write(dir.path(), "deg.json", r#"{"m": 2, "matrix": [[0.25, 0.0], [0.0, 0.25]], "b": [1.0, 0.0]}"#);
    assert_eq!(code(&hipea(&["solve", &degenerate])), 2);

    let odd = write(dir.path(), "odd.json", r#"{"m": 3, "matrix": [[0.5, 0.0], [0.0, 0.3]], "b": [1.0, 0.0]}"#);
    assert_eq!(code(&hipea(&["solve", &odd])), 2);

    let unknown = write(dir.path(), "unk.json", r#"{"m": 2, "matrix": [[0.25, 0.0], [0.0, 0.5]], "b": [1.0, 0.0], "color": 1}"#);
    assert_eq!(code(&hipea(&["solve", &unknown])), 2);

    assert_eq!(code(&hipea(&["fixture", "no-such-fixture"])), 2);
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing-dir").join("r.json");
    assert_eq!(code(&hipea(&["solve", "demo", "--algorithm", "hipea1", "--out", out.to_str().unwrap()])), 1);
}

#[test]
fn ambiguous_signs_exit_3_with_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let problem = format!(
        r#"{{"m": 2, "spectrum": {{"eigenvalues": ["01", "10"], "eigenvectors": [[{s}, {s}], [{s}, {}]]}}, "b": [1.0, 0.0], "algorithm": "hipea1"}}"#,
        -s
    );
    let path = write(dir.path(), "amb.json", &problem);
    let out = hipea(&["solve", &path]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let report = SolveReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(report.has_ambiguity());
    assert_eq!(report.warnings.len(), 1);
}

#[test]
fn fixture_and_estimate_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("demo.json");
    assert_eq!(code(&hipea(&["fixture", "demo", "--out", path.to_str().unwrap()])), 0);
    let out = hipea(&["solve", path.to_str().unwrap(), "--algorithm", "hipea3", "--exact"]);
    assert_eq!(code(&out), 0);

    let est = hipea(&["estimate", "--n", "4", "--m", "9", "--n-top", "3"]);
    assert_eq!(code(&est), 0);
    assert_eq!(String::from_utf8(est.stdout).unwrap(), "min 9\nmax 36\n");
}
