use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn hypctrl(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_hypctrl"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn presets_are_listed() {
    let out = Command::new(env!("CARGO_BIN_EXE_hypctrl")).arg("presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["sv-loop-energy", "sv-loop-waterlevel", "wave-periodic", "lin-sv-loop", "wave-eigenmode"] {
        assert!(text.contains(name), "{name} missing");
    }
    assert!(text.lines().count() >= 5);
}

#[test]
fn zero_canal_simulation_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.json");
    fs::write(&cfg, r#"{"kind":"saint-venant","grid":{"Nx":40,"T":0.2}}"#).unwrap();
    let out = dir.path().join("run");
    assert_eq!(hypctrl(&["simulate", "--config", cfg.to_str().unwrap(), "--check"], &out), 0);
    let csv = fs::read_to_string(out.join("field.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,x,v1,v2");
    for line in lines {
        let values: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(values[2..].iter().all(|v| *v == 0.0), "{line}");
    }
    assert!(report(&out)["error"].is_null());
}

#[test]
fn short_horizon_reports_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(hypctrl(&["control", "--preset", "lin-sv-loop", "--T", "0.1"], &out), 3);
    let r = report(&out);
    assert_eq!(r["error"], "TimeTooShort");
    // L / |λ₁(0)| with λ₁ = 0.5 - sqrt(9.81 * 2)
    let t_star = 1.0 / ((9.81_f64 * 2.0).sqrt() - 0.5);
    assert!((r["T_star"].as_f64().unwrap() - t_star).abs() < 1e-12);
}

#[test]
fn control_run_writes_controls() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(hypctrl(&["control", "--preset", "sv-loop-energy", "--nx", "100", "--check"], &out), 0);
    let csv = fs::read_to_string(out.join("controls.csv")).unwrap();
    assert!(csv.starts_with("t,H1,H2,h,hbar\n"));
    let r = report(&out);
    assert!(r["T_star"].as_f64().unwrap() > 0.0);
    assert!(r["sup_error"].as_f64().unwrap() <= 10.0 * r["scheme_error_estimate"].as_f64().unwrap());
}

#[test]
fn loop_obstruction_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(hypctrl(&["obstruct", "loop", "--alpha", "2", "--trials", "3", "--check"], &out), 0);
    let r = report(&out);
    assert_eq!(r["obstruction_value"].as_f64().unwrap(), 3.0);
    assert_eq!(r["scenario"], "loop");
    assert!(r["invariant_drift"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn wave_obstruction_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(hypctrl(&["obstruct", "wave", "--n", "2", "--nx", "40", "--check"], &out), 0);
    let v = report(&out)["obstruction_value"].as_f64().unwrap();
    assert!((v - 2.0 * std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"kind":"wave","grid":{"Nx":4,"T":1}}"#).unwrap();
    let out = dir.path().join("run");
    assert_eq!(hypctrl(&["simulate", "--config", cfg.to_str().unwrap()], &out), 2);
    assert_eq!(report(&out)["error"], "InvalidInput");
    assert_eq!(hypctrl(&["simulate", "--preset", "no-such-preset"], &out), 2);
}

#[test]
fn failed_check_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(hypctrl(&["converge", "--preset", "sv-loop-energy", "--nx", "8", "--check"], &out), 4);
    assert_eq!(report(&out)["check"], false);
    assert_eq!(hypctrl(&["converge", "--preset", "sv-loop-energy", "--nx", "8"], &out), 0);
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(hypctrl(&["control", "--preset", "wave-periodic", "--nx", "64"], out), 0);
    }
    for name in ["field.csv", "controls.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}
