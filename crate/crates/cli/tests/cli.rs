use std::path::Path;
use std::process::{Command, Output};

fn orowan_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orowan-lab")).args(args).env("RUST_LOG", "warn").output().expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn ddd_study_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"ddd": {"positions": [-1.0, 0.0, 1.0], "c0": 2.0, "final_time": 0.5}}"#);
    let out = dir.path().join("run");
    let o = orowan_lab(&["ddd", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["study"], "ddd");
    assert_eq!(manifest["passed"], true);
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,y_1,y_2,y_3"));
}

#[test]
fn failing_gate_gives_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    // The closed-form layer gate uses a normalization the solved layer does not meet.
    let cfg = write_config(
        dir.path(),
        r#"{"layer": {"half_width": 20.0, "n": 1024}, "potential": {"kind": "classical", "d": 1.0}}"#,
    );
    let out = dir.path().join("run");
    let o = orowan_lab(&["layer", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn unknown_config_field_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"not_a_field": 1}"#);
    let o = orowan_lab(&["macro", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not_a_field"));
}

#[test]
fn missing_study_is_a_usage_error() {
    let o = orowan_lab(&[]);
    assert!(!o.status.success());
}
