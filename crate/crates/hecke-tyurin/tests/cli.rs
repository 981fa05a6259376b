use std::path::{Path, PathBuf};
use std::process::Command;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn tyurin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_tyurin")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn default_scenario_passes_with_enough_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let (code, _, _) = tyurin(&["verify", "--scenario", scenario("g2-default.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = report(&out);
    let checks: Vec<&serde_json::Value> = r["suites"].as_array().unwrap().iter().flat_map(|s| s["checks"].as_array().unwrap()).collect();
    assert!(checks.len() >= 25);
    for c in checks {
        assert!(!c["anchor"].as_str().unwrap().is_empty(), "{c}");
    }
}

#[test]
fn reports_are_deterministic_apart_from_the_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for n in 0..2 {
        let out = dir.path().join(format!("r{n}.json"));
        let (code, _, _) = tyurin(&[
            "verify", "--scenario", scenario("g2-default.json").to_str().unwrap(),
            "--out", out.to_str().unwrap(), "--suite", "hecke", "--suite", "variation", "--seed", "5",
        ]);
        assert_eq!(code, 0);
        let mut r = report(&out);
        r["environment"]["timestamp"] = 0.into();
        texts.push(r.to_string());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn five_points_is_a_validation_error() {
    let (code, out, _) = tyurin(&["verify", "--scenario", scenario("g2-five-points.json").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.contains("expected 3g = 6 points"), "{out}");
}

#[test]
fn coincident_lines_are_a_numeric_failure() {
    let (code, out, _) = tyurin(&["verify", "--scenario", scenario("g2-coincident-ell.json").to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(out.contains("Den vanishes") && out.contains("[0, 2, 4]"), "{out}");
}

#[test]
fn unknown_suite_is_rejected() {
    let (code, _, _) = tyurin(&["verify", "--scenario", scenario("g2-default.json").to_str().unwrap(), "--suite", "nope"]);
    assert_eq!(code, 2);
}

#[test]
fn periods_and_cache_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = tyurin(&["periods", "--scenario", scenario("g2-default.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["genus"], 2);
    let cache = dir.path().join("c.json");
    let (code, _, _) = tyurin(&["cache", "--scenario", scenario("g2-default.json").to_str().unwrap(), "--out", cache.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(cache.exists());
}

#[test]
fn contrast_reports_each_level() {
    let (code, out, _) = tyurin(&["contrast", "--scenario", scenario("g2-default.json").to_str().unwrap(), "--k", "-2", "--k", "0"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0]["max_commutator"].as_f64().unwrap() < 1e-5);
}
