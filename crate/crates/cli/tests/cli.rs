use serde_json::Value;
use std::process::{Command, Output};

fn run(dir: &std::path::Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermflow"))
        .args(args)
        .env("HERMFLOW_OUT", dir)
        .output()
        .expect("binary runs")
}

fn summary(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().last().expect("one summary line");
    serde_json::from_str(line).expect("summary is JSON")
}

#[test]
fn wkbj_reports_burnett_constants() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["wkbj", "--m", "2", "--N", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let s = summary(&out);
    assert_eq!(s["schema"], "hermflow/1");
    let d0 = s["d0"].as_f64().unwrap();
    assert!((d0 - 3.0 * 2f64.powf(-11.0 / 3.0)).abs() < 1e-12);
    assert_eq!(s["alpha"]["num"], "4");
    assert_eq!(s["alpha"]["den"], "3");
    assert!(dir.path().join("wkbj_m2_N3.json").exists());
}

#[test]
fn eig_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["eig-check", "--m", "1", "--max-level", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let s = summary(&out);
    assert_eq!(s["pass"], true);
    assert_eq!(s["failures"], 0);
}

#[test]
fn stokes_evolution_of_rotation_decays_at_unit_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["evolve", "--model", "stokes", "--data", "fixture:1:0", "--tau", "3"],
    );
    assert_eq!(out.status.code(), Some(0));
    let s = summary(&out);
    assert!((s["fitted_rate"].as_f64().unwrap() + 1.0).abs() < 1e-9);
    let csv = std::fs::read_to_string(dir.path().join("trajectory_stokes.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    let col = header.split(',').position(|h| h.starts_with("v11")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let (first, last) = (&rows[0], rows.last().unwrap());
    let slope = (last[col].ln() - first[col].ln()) / (last[0] - first[0]);
    assert!((slope + 1.0).abs() < 1e-9);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["wkbj", "--bogus"]);
    assert_eq!(out.status.code(), Some(64));
    let out = run(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn invalid_input_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["wkbj", "--m", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(summary(&out)["pass"], false);
    let out = run(dir.path(), &["evolve", "--data", "fixture:1:9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"m": 3, "max-level": 2}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let s = summary(&run(dir.path(), &["eig-check", "--config", cfg]));
    assert_eq!(s["m"], serde_json::json!([3]));
    assert_eq!(s["max_level"], 2);
    let s = summary(&run(dir.path(), &["eig-check", "--config", cfg, "--m", "2"]));
    assert_eq!(s["m"], serde_json::json!([2]));
}

#[test]
fn identical_runs_give_identical_artifacts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run(d.path(), &["evolve", "--model", "burnett", "--data", "fixture:1:1", "--tau", "2"]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["trajectory_burnett.csv", "resonance_burnett.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn classify_field_reports_scaling_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&run(dir.path(), &["classify", "--field", "x1^3 + t"]));
    assert_eq!(s["M"], 3);
    assert_eq!(s["K"], 1);
    assert_eq!(s["gamma"], "1/3");
}
