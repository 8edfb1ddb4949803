//! End-to-end tests running the compiled binary against the bundled
//! experiment files and synthetic bad inputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_consensus-halt"))
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

fn run_args(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn write_temp(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).expect("write temp file");
    p
}

#[test]
fn run_prints_reference_table() {
    let exp = repo_file("experiments/example1.exp");
    let out = run_args(&["run", exp.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("level"), "missing header: {text}");
    for needle in [
        "1.00000     15         19        4",
        "0.500000    18         22        4",
        "0.100000    23         27        4",
        "0.0100000   34         38        4",
        "0.00100000  44         48        4",
    ] {
        assert!(text.contains(needle), "missing row {needle:?} in:\n{text}");
    }
}

#[test]
fn run_theorem_mode_certifies_each_level() {
    let exp = repo_file("experiments/example1.exp");
    let out = run_args(&["run", exp.to_str().unwrap(), "--mode", "theorem"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    for needle in [
        "15         23",
        "18         25",
        "23         30",
        "34         44",
        "44         51",
    ] {
        assert!(text.contains(needle), "missing pair {needle:?} in:\n{text}");
    }
}

#[test]
fn run_output_is_byte_stable() {
    let exp = repo_file("experiments/example1.exp");
    let a = run_args(&["run", exp.to_str().unwrap()]);
    let b = run_args(&["run", exp.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}

#[test]
fn run_rejects_bad_row_sum_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(
        &dir,
        "bad.exp",
        "weights = [[0.5, 0.4], [0.5, 0.5]]\nx0 = [1.0, 2.0]\neps_levels = [0.5]\n",
    );
    let out = run_args(&["run", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(
        err.contains("row 0"),
        "diagnostic should name the row: {err}"
    );
}

#[test]
fn run_rejects_toml_syntax_error_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(&dir, "syntax.exp", "weights = [[1.0]]\nx0 = [1.0\n");
    let out = run_args(&["run", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("line"), "should mention the line");
}

#[test]
fn run_strict_fails_on_disconnected_graph() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(
        &dir,
        "nonsc.exp",
        "weights = [[1.0, 0.0], [0.5, 0.5]]\nx0 = [1.0, 2.0]\neps_levels = [0.5]\n",
    );
    let strict = run_args(&["run", p.to_str().unwrap(), "--strict"]);
    assert_eq!(strict.status.code(), Some(3));
    assert!(stderr_of(&strict).contains("strongly connected"));

    // Without --strict the run proceeds on the size threshold and warns.
    let lax = run_args(&["run", p.to_str().unwrap()]);
    assert_eq!(lax.status.code(), Some(0));
    let text = stdout_of(&lax);
    assert!(text.contains("warning"), "expected warning line: {text}");
    assert!(text.contains("size(1)"), "expected fallback label: {text}");
}

#[test]
fn run_short_horizon_reports_never() {
    let exp = repo_file("experiments/ring3.exp");
    let out = run_args(&["run", exp.to_str().unwrap(), "--max-steps", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("NEVER"), "expected NEVER markers: {text}");
    assert!(
        text.contains("UNDEFINED"),
        "expected UNDEFINED response: {text}"
    );
}

#[test]
fn run_writes_trace_and_csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let exp = repo_file("experiments/example1.exp");
    let csv_dir = dir.path().join("out");
    let trace = dir.path().join("trace.csv");
    let out = run_args(&[
        "run",
        exp.to_str().unwrap(),
        "--csv",
        csv_dir.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let report = std::fs::read_to_string(csv_dir.join("report.csv")).unwrap();
    assert!(report.starts_with("level,consensus_time,stopping_time,response_time\n"));
    assert!(report.contains("0.500000,18,22,4"));

    let json = std::fs::read_to_string(csv_dir.join("report.json")).unwrap();
    assert!(json.trim_start().starts_with('['));
    assert!(json.contains("\"stopping_time\": 22"));
    assert!(json.contains("\"bound\": 40"));

    for i in 1..=5 {
        let p = csv_dir.join(format!("trajectory-{i}.csv"));
        let body = std::fs::read_to_string(&p).unwrap();
        assert!(body.starts_with("k,node,x,y,z,stopped,event\n"), "{p:?}");
    }

    // Five levels: trace files carry a 1-based level index.
    let t1 = std::fs::read_to_string(dir.path().join("trace.1.csv")).unwrap();
    assert!(t1.starts_with("k,node,x,y,z,stopped,event\n"));
    assert!(t1.contains("0,0,10,0,0,false,"));
    assert!(dir.path().join("trace.5.csv").exists());
}

#[test]
fn run_single_level_trace_keeps_exact_path() {
    let dir = tempfile::tempdir().unwrap();
    let exp = repo_file("experiments/ring3.exp");
    let trace = dir.path().join("ring.csv");
    let out = run_args(&[
        "run",
        exp.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(
        trace.exists(),
        "single-level run writes the given path verbatim"
    );
}

#[test]
fn analyze_prints_ergodic_quantities() {
    let exp = repo_file("experiments/example1.exp");
    let out = run_args(&["analyze", exp.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert_eq!(text, "diameter = 3\nh = 2\ntau_h = 0.0593630\nbound = 40\n");
}

#[test]
fn analyze_fails_on_disconnected_graph() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(
        &dir,
        "nonsc.exp",
        "weights = [[1.0, 0.0], [0.5, 0.5]]\nx0 = [1.0, 2.0]\neps_levels = [0.5]\n",
    );
    let out = run_args(&["analyze", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reproduce_passes_all_checks() {
    let out = run_args(&["reproduce"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    for check in [
        "PASS consensus-times-match-reported",
        "PASS stop-certifies-band",
        "PASS liveness-bound",
        "PASS halt-latency-bound",
        "PASS ring-counterexample-no-early-stop",
    ] {
        assert!(text.contains(check), "missing {check:?} in:\n{text}");
    }
    assert!(!text.contains("FAIL"), "unexpected failure in:\n{text}");
}

#[test]
fn reproduce_theorem_mode_checks_response_bound() {
    let out = run_args(&["reproduce", "--mode", "theorem"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(
        text.contains("PASS response-within-bound"),
        "missing bound check:\n{text}"
    );
    // Under this convention the measured stopping slots sit within one slot
    // of the recorded reference values.
    assert!(
        text.contains("# measured minus reported: 0 1 0 0 0"),
        "distances changed:\n{text}"
    );
}

#[test]
fn reproduce_writes_comparison_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_args(&["reproduce", "--csv", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("report.csv").exists());
    assert!(dir.path().join("report.json").exists());
    assert!(dir.path().join("trajectory-1.csv").exists());
    let ring = std::fs::read_to_string(dir.path().join("trajectory-ring.csv")).unwrap();
    assert!(ring.starts_with("k,node,x,y,z,stopped,event\n"));
    assert!(
        ring.contains("0,2,100,0,0,false,"),
        "ring initial state row missing"
    );
}

#[test]
fn detector_and_threshold_flags_are_accepted() {
    let exp = repo_file("experiments/example1.exp");
    let out = run_args(&[
        "run",
        exp.to_str().unwrap(),
        "--detector",
        "min-rounds",
        "--threshold",
        "size",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("detector=min-rounds"), "header: {text}");
    assert!(text.contains("threshold=size(3)"), "header: {text}");
}

#[test]
fn zero_max_steps_is_rejected() {
    let exp = repo_file("experiments/example1.exp");
    let out = run_args(&["run", exp.to_str().unwrap(), "--max-steps", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_is_a_config_error() {
    let out = run_args(&["run", "/nonexistent/path.exp"]);
    assert_eq!(out.status.code(), Some(2));
}
