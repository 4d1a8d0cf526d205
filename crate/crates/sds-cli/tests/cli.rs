//! End-to-end tests of the `sds` binary: exit codes, output files, and the
//! byte-level trace contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn reference_trace_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../sds-core/tests/fixtures/sphere_1d_trace.json")
}

fn sds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sds"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn run_reproduces_the_reference_trace_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("sphere_fixture.json");
    let output = sds(&[
        "run",
        config.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));

    let written = std::fs::read_to_string(dir.path().join("trace.json")).unwrap();
    let reference = std::fs::read_to_string(reference_trace_path()).unwrap();
    assert_eq!(written, reference, "trace.json deviates from the reference");

    assert!(dir.path().join("trace.csv").exists());
    assert!(dir.path().join("bound_report.json").exists());

    let out = stdout(&output);
    assert!(out.contains("k=1 alpha=1 l=1 f=0 evals=4"));
    assert!(out.contains("total_evaluations=9"));
    assert!(out.contains("all_pass: true"));
}

#[test]
fn run_trace_csv_matches_trace_json_numerically() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("sphere_fixture.json");
    let output = sds(&[
        "run",
        config.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("trace.json")).unwrap())
            .unwrap();
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let iterates = json["iterates"].as_array().unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), iterates.len());
    for (row, iterate) in rows.iter().zip(iterates) {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[0].parse::<u64>().unwrap(), iterate["k"].as_u64().unwrap());
        assert_eq!(
            cells[1].parse::<f64>().unwrap(),
            iterate["alpha"].as_f64().unwrap()
        );
        assert_eq!(cells[3].parse::<f64>().unwrap(), iterate["f"].as_f64().unwrap());
        assert_eq!(
            cells[6].parse::<f64>().unwrap(),
            iterate["x"][0].as_f64().unwrap()
        );
    }
}

#[test]
fn run_rejects_non_spanning_directions_with_exit_2() {
    let output = sds(&["run", fixture("non_spanning.json").to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(
        stderr(&output).contains("not a positive spanning set"),
        "stderr: {}",
        stderr(&output)
    );
}

#[test]
fn run_rosenbrock_nonconvex_passes_with_the_local_constant() {
    let dir = tempfile::tempdir().unwrap();
    let output = sds(&[
        "run",
        fixture("rosenbrock_nonconvex.json").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    assert!(stdout(&output).contains("all_pass: true"));
}

#[test]
fn run_flags_bound_violations_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let output = sds(&[
        "run",
        fixture("convex_violation.json").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1), "stderr: {}", stderr(&output));
    assert!(stdout(&output).contains("all_pass: false"));
}

#[test]
fn run_rejects_malformed_configs_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"objective": {"name": "mystery", "n": 2}}"#).unwrap();
    let output = sds(&["run", bad.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));

    let missing = dir.path().join("absent.json");
    let output = sds(&["run", missing.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn cosine_reports_the_maximal_basis_geometry() {
    let output = sds(&["cosine", "--mpb", "3"]);
    assert_eq!(output.status.code(), Some(0));
    let out = stdout(&output);
    assert!(out.contains("exact mu: 0.577350269"), "stdout: {out}");
    assert!(out.contains("|D|/mu^2: 18.000000000"), "stdout: {out}");
    assert!(out.contains("positive spanning set: yes"));
}

#[test]
fn cosine_reads_direction_files() {
    let output = sds(&[
        "cosine",
        "--file",
        fixture("minimal_basis_directions.json").to_str().unwrap(),
        "--samples",
        "200000",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let out = stdout(&output);
    assert!(out.contains("exact mu: 0.382683432"), "stdout: {out}");
    assert!(out.contains("positive spanning set: yes"));

    let output = sds(&["cosine", "--file", "/nonexistent.json"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn sweep_c_finds_the_optimal_forcing_constant_on_the_grid() {
    let output = sds(&[
        "sweep-c",
        fixture("sweep_sphere.json").to_str().unwrap(),
        "--grid",
        "0.25,0.5,1,2,4",
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let out = stdout(&output);
    assert!(out.contains("bound-term argmin: c=1"), "stdout: {out}");
    assert!(out.starts_with("c,bound_term,observed_evaluations"));
}

#[test]
fn init_compare_matches_the_hand_simulations() {
    let output = sds(&[
        "init-compare",
        fixture("init_compare_sphere.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let out = stdout(&output);
    let bootstrap_line = out.lines().find(|l| l.contains("Bootstrap")).unwrap();
    assert!(bootstrap_line.contains(" 6 "), "line: {bootstrap_line}");
    assert!(bootstrap_line.contains("18.000000000"), "line: {bootstrap_line}");
    let stepsize_line = out.lines().find(|l| l.contains("Stepsize")).unwrap();
    assert!(stepsize_line.contains(" 6 "), "line: {stepsize_line}");
    let forcing_line = out.lines().find(|l| l.contains("ForcingConstant")).unwrap();
    assert!(forcing_line.contains(" 2 "), "line: {forcing_line}");
    assert!(forcing_line.contains("2.000000000"), "line: {forcing_line}");
}

#[test]
fn experiment_config_round_trips_unchanged() {
    for name in [
        "sphere_fixture.json",
        "rosenbrock_nonconvex.json",
        "convex_violation.json",
        "init_compare_sphere.json",
    ] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let parsed: sds_cli::ExperimentConfig = serde_json::from_str(&text).unwrap();
        let serialized = serde_json::to_string(&parsed).unwrap();
        let reparsed: sds_cli::ExperimentConfig = serde_json::from_str(&serialized).unwrap();
        assert_eq!(parsed, reparsed, "{name} does not round-trip");
    }
}
