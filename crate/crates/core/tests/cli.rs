use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn imcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imcf")).args(args).env_remove("IMCF_THREADS").output().expect("binary runs")
}

fn preset(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name).to_string_lossy().into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SHORT_FLOW: &str = r#"{
  // short run
  "scenario": "short",
  "ambient": { "n": 3, "m": 1.0 },
  "grid": { "mode": "axisym_1d", "n_theta": 32 },
  "initial": { "kind": "BASE" },
  "flow": { "t_end": 0.3, "snapshot_interval": 0.1 },
  "seed": 5
}"#;

#[test]
fn version_and_help() {
    let out = imcf(&["version"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
    assert_eq!(code(&imcf(&["--help"])), 0);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&imcf(&[])), 64);
    assert_eq!(code(&imcf(&["frobnicate"])), 64);
    assert_eq!(code(&imcf(&["run"])), 64);
    assert_eq!(code(&imcf(&["run", "--config", "/nonexistent/file.json"])), 64);
    assert_eq!(code(&imcf(&["check-static", "--seed", "abc"])), 64);
}

#[test]
fn run_coordinate_sphere_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out =
        imcf(&["run", "--config", &preset("coordinate_sphere.json"), "--out", out_dir.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());

    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), imcf::monitor::CSV_COLUMNS.join(","));
    let records = imcf::monitor::read_records_csv(trace.as_bytes()).unwrap();
    assert_eq!(records.len(), 21);
    for r in &records {
        assert!((r.q - 7.0898154).abs() < 1e-7, "{}", r.q);
    }

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["scenario"], "coordinate_sphere");
    assert_eq!(report["effective_config"]["output"]["dir"], out_dir.to_str().unwrap());
    assert_eq!(report["effective_config"]["checks"]["tolerances"]["flux_relative"], 1e-8);
    assert!(report["verdicts"].as_array().unwrap().iter().all(|v| v["pass"] == true));
    assert!(report["timings"]["total_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn run_below_horizon_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let body = SHORT_FLOW.replace(r#""kind": "BASE""#, r#""kind": "coordinate_sphere", "base_s": 1.5"#);
    let path = write_config(dir.path(), "bad.json", &body);
    let out = imcf(&["run", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 64);
    assert!(!out.stderr.is_empty());
    assert!(!dir.path().join("trace.csv").exists());
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let body = SHORT_FLOW
        .replace(r#""kind": "BASE""#, r#""kind": "coordinate_sphere", "base_s": 4.0"#)
        .replace(r#""seed": 5"#, r#""seed": 5, "colour": "blue""#);
    let path = write_config(dir.path(), "typo.json", &body);
    assert_eq!(code(&imcf(&["run", "--config", &path])), 64);
}

#[test]
fn failing_verdict_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    // Area growth cannot be met to 1e-30 by a finite-step integrator.
    let body = SHORT_FLOW
        .replace(
            r#""kind": "BASE""#,
            r#""kind": "perturbed_sphere", "base_s": 4.0, "perturbation": { "l": 2, "amplitude": 0.1 }"#,
        )
        .replace(
            r#""seed": 5"#,
            r#""seed": 5, "checks": { "verdicts": ["area_growth"], "tolerances": { "area_growth_relative": 1e-30 } }"#,
        );
    let path = write_config(dir.path(), "strict.json", &body);
    let out = imcf(&["run", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let failing: Vec<_> = report["verdicts"].as_array().unwrap().iter().filter(|v| v["pass"] == false).collect();
    assert_eq!(failing.len(), 1);
    assert_eq!(failing[0]["name"], "area_growth");
}

#[test]
fn breakdown_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // A step budget far too small for t_end stops the flow early.
    let body = SHORT_FLOW
        .replace(r#""kind": "BASE""#, r#""kind": "coordinate_sphere", "base_s": 4.0"#)
        .replace(r#""snapshot_interval": 0.1"#, r#""snapshot_interval": 0.1, "max_steps": 5"#);
    let path = write_config(dir.path(), "short.json", &body);
    let out = imcf(&["run", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("trace.csv").exists());
}

#[test]
fn seed_override_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let out = imcf(&[
        "run",
        "--config",
        &preset("coordinate_sphere.json"),
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "99",
        "--quiet",
    ]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["effective_config"]["seed"], 99);
}

#[test]
fn check_static_exit_codes() {
    let out = imcf(&["check-static", "--n", "3", "--m", "1", "--samples", "1000"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("static_identities"));
    assert_eq!(code(&imcf(&["check-static", "--quiet"])), 0);
    assert_eq!(code(&imcf(&["check-static", "--corrupt-lambda-dd", "--quiet"])), 1);
    assert_eq!(code(&imcf(&["check-static", "--n", "2", "--m", "1"])), 64);
}

#[test]
fn check_flux_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = imcf(&["check-flux", "--count", "50", "--seed", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("report.json").exists());
    assert_eq!(code(&imcf(&["check-flux", "--m", "0", "--count", "5", "--quiet"])), 0);
    assert_eq!(code(&imcf(&["check-flux", "--n-theta", "16", "--count", "5", "--corrupt", "--quiet"])), 1);
    assert_eq!(code(&imcf(&["check-flux", "--count", "0"])), 64);
}

#[test]
fn sweep_writes_corpus_and_respects_threads() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(
        code(&imcf(&[
            "sweep",
            "--config",
            &preset("gap_sweep.json"),
            "--out",
            a.to_str().unwrap(),
            "--threads",
            "1",
            "--quiet"
        ])),
        0
    );
    let out = Command::new(env!("CARGO_BIN_EXE_imcf"))
        .args(["sweep", "--config", &preset("gap_sweep.json"), "--out", b.to_str().unwrap(), "--quiet"])
        .env("IMCF_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let csv_a = std::fs::read(a.join("sweep.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read(b.join("sweep.csv")).unwrap());
    let text = String::from_utf8(csv_a).unwrap();
    assert!(text.starts_with("n,m,s,l,epsilon,area,fH_integral,Q,gap,gap_relative\n"));
    assert_eq!(text.lines().count(), 1 + 24);
}

#[test]
fn empty_sweep_exits_64() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "empty.json",
        r#"{ "scenario": "empty", "grid": { "mode": "axisym_1d", "n_theta": 32 },
             "parameters": { "epsilon": [], "l": [2], "s": [4.0], "m": [1.0], "n": [3] } }"#,
    );
    assert_eq!(code(&imcf(&["sweep", "--config", &path, "--out", dir.path().to_str().unwrap()])), 64);
}
