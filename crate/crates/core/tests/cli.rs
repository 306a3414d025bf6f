use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_inertial-attitude");

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn simulate_reaches_the_matching_equilibrium() {
    for (file, label, q0) in [("baseline.json", "Ω₁⁺", 1.0), ("unwinding.json", "Ω₁⁻", -1.0)] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = configs().join(file);
        let out = run(&["simulate", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let s = summary(dir.path());
        assert_eq!(s["terminal_equilibrium"], label);
        assert!((s["final_q_bar"][0].as_f64().unwrap() - q0).abs() < 1e-6);
        let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
        assert_eq!(csv.lines().count(), 2002);
    }
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("baseline.json");
    let out = run(&[
        "simulate",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--dt",
        "0.005",
        "--t-final",
        "1",
    ]);
    assert!(out.status.success());
    let s = summary(dir.path());
    assert_eq!(s["dt"], 0.005);
    assert_eq!(s["samples"], 201);
}

#[test]
fn missing_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: Value = serde_json::from_str(&fs::read_to_string(configs().join("baseline.json")).unwrap()).unwrap();
    cfg["plant"].as_object_mut().unwrap().remove("inertia");
    let path = dir.path().join("broken.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let out = run(&["simulate", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("inertia"), "{err}");
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn bad_step_is_rejected() {
    let cfg = configs().join("baseline.json");
    let out = run(&["simulate", cfg.to_str().unwrap(), "--dt=-1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sim.dt"));
}

#[test]
fn runs_are_byte_identical() {
    let cfg = configs().join("baseline.json");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert!(run(&["simulate", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap()]).status.success());
    }
    for f in ["trajectory.csv", "summary.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn tuning_is_reproducible_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: Value = serde_json::from_str(&fs::read_to_string(configs().join("tune.json")).unwrap()).unwrap();
    cfg["tuning"]["n_starts"] = 2.into();
    cfg["tuning"]["max_iterations"] = 5.into();
    cfg["sim"]["t_final"] = 2.0.into();
    let path = dir.path().join("small.json");
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let mut results = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = run(&["tune", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--seed", "7"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        results.push(fs::read(out_dir.join("tune.json")).unwrap());
    }
    assert_eq!(results[0], results[1]);
    let r: Value = serde_json::from_slice(&results[0]).unwrap();
    assert_eq!(r["rng_seed"], 7);
}

#[test]
fn analyze_reports_six_saddles() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("baseline.json");
    let out = run(&["analyze", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let r: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("analysis.json")).unwrap()).unwrap();
    assert_eq!(r["gen"]["holds"], true);
    assert_eq!(r["stable_hurwitz"], true);
    assert_eq!(r["unstable_hyperbolic"], 6);
    assert_eq!(r["equilibria"].as_array().unwrap().len(), 8);
}

#[test]
fn validate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["validate", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("documented inconsistency"));
    assert!(dir.path().join("validation.json").exists());
}
