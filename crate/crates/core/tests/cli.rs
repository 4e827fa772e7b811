//! End-to-end runs of the command-line front end.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn frostman(config: &str, out: &Path, args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_frostman"))
        .arg("--config")
        .arg(configs().join(config))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
        .status
        .code()
        .unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn minimize_recovers_balayage_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(frostman("balayage_1d.toml", dir.path(), &["minimize"]), 0);
    let rep = json(dir.path().join("report.json"));
    assert_eq!(rep["el"]["pass"], true);
    assert!(rep["l1_to_omega"].as_f64().unwrap() < 0.05);
    let man = json(dir.path().join("manifest.json"));
    assert_eq!(man["command"], "minimize");
    assert_eq!(man["exit_code"], 0);
    assert!(man["config"].as_str().unwrap().contains("balayage"));
    for f in ["measure.csv", "trace.csv", "report.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn height_matches_the_minimizer_level() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(frostman("balayage_1d.toml", dir.path(), &["height"]), 0);
    assert!(dir.path().join("duality.json").exists());
}

#[test]
fn mass_two_balayage_exists() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(frostman("exist_omega2_1d.toml", dir.path(), &["probe", "exist"]), 0);
    let rep = json(dir.path().join("probe.json"));
    assert_eq!(rep["verdict"], "exists");
    assert!(rep["margin"].as_f64().unwrap() > 0.0);
    for key in ["probe", "verdict", "margin", "tolerances", "diagnostics", "witness_files"] {
        assert!(rep.get(key).is_some(), "{key}");
    }
}

#[test]
fn shallow_well_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(frostman("bump_well_1d.toml", dir.path(), &["probe", "exist"]), 3);
    let rep = json(dir.path().join("probe.json"));
    assert_eq!(rep["verdict"], "inconclusive");
}

#[test]
fn quadrature_commands_meet_their_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(frostman("fourier_1d.toml", &dir.path().join("f"), &["fourier"]), 0);
    let csv = std::fs::read_to_string(dir.path().join("f/fourier.csv")).unwrap();
    assert!(csv.starts_with("xi,estimate,reference,relative_error"));
    assert_eq!(frostman("riesz_3d.toml", &dir.path().join("r"), &["repr"]), 0);
    assert_eq!(frostman("riesz_3d.toml", &dir.path().join("k"), &["kernel-check"]), 0);
    assert!(dir.path().join("k/certificate.json").exists());
}

#[test]
fn missing_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let code = Command::new(env!("CARGO_BIN_EXE_frostman"))
        .arg("--config")
        .arg(dir.path().join("nope.toml"))
        .arg("--out")
        .arg(dir.path())
        .arg("minimize")
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(1));
    let bad = Command::new(env!("CARGO_BIN_EXE_frostman")).arg("frobnicate").status().unwrap().code();
    assert_eq!(bad, Some(1));
}

#[test]
fn el_verify_rejects_a_perturbed_measure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("el.toml");
    let text = std::fs::read_to_string(configs().join("balayage_1d.toml")).unwrap();
    // all mass on one cell is far from the equilibrium
    std::fs::write(dir.path().join("m.csv"), "i0,x0,w\n10,-1.83,1.0\n").unwrap();
    std::fs::write(&cfg, format!("{text}\n[el]\nmeasure_file = \"m.csv\"\n")).unwrap();
    let code = Command::new(env!("CARGO_BIN_EXE_frostman"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .arg("el-verify")
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(2));
    assert_eq!(json(dir.path().join("out/el_report.json"))["pass"], false);
}
