use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use snbif::cli::{run, EXIT_DEGRADED, EXIT_INVALID, EXIT_OK, EXIT_USAGE};

fn scenario(name: &str) -> String {
    format!("{}/scenarios/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn snbif(args: &[&str]) -> i32 {
    run(std::iter::once("snbif").chain(args.iter().copied()))
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn out(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn sweep_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = out(&dir, "diagram.csv");
    let code = snbif(&["sweep", "-s", &scenario("transcritical"), "-o", csv.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda,count,pinched,alpha_mean,kappa_mean,beta_mean,gamma_alpha,gamma_kappa,gamma_beta,gap_min,gap_max,horizon"
    );
    assert_eq!(lines.count(), 20);
    let summary = read_json(&csv.with_extension("json"));
    assert_eq!(summary["classification"], "TranscriticalPlusSaddleNode");
    assert!(summary["degraded"].as_array().unwrap().is_empty());
}

#[test]
fn sweep_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (out(&dir, "a.csv"), out(&dir, "b.csv"));
    for (p, threads) in [(&a, "1"), (&b, "4")] {
        let code = snbif(&["sweep", "-s", &scenario("transcritical"), "-o", p.to_str().unwrap(), "--threads", threads]);
        assert_eq!(code, EXIT_OK);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn census_of_a_bistable_cubic() {
    let dir = tempfile::tempdir().unwrap();
    let p = out(&dir, "census.json");
    let code = snbif(&["census", "-s", &scenario("double_saddle_node"), "--lambda", "0.0", "-o", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let v = read_json(&p);
    assert_eq!(v["count"], 3);
    assert_eq!(v["sets"].as_array().unwrap().len(), 3);
}

#[test]
fn dc_measure_of_the_deadzone() {
    let dir = tempfile::tempdir().unwrap();
    let p = out(&dir, "dc.json");
    let code = snbif(&["dc", "-s", &scenario("deadzone"), "--interval", "-1", "1", "--eps", "0.25", "-o", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let m = read_json(&p)["measure"].as_f64().unwrap();
    assert!((m - 1.0 / 3.0).abs() < 0.02, "{m}");
}

#[test]
fn overrides_reach_the_numerics() {
    let dir = tempfile::tempdir().unwrap();
    let p = out(&dir, "census.json");
    let code = snbif(&[
        "census",
        "-s",
        &scenario("double_saddle_node"),
        "--lambda",
        "-0.5",
        "--set",
        "pullback_T=8",
        "-o",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(read_json(&p)["count"], 1);
    assert_eq!(snbif(&["census", "-s", &scenario("pure_cubic"), "--lambda", "0", "--set", "nope=1"]), EXIT_USAGE);
}

#[test]
fn invalid_models_exit_2_with_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let bad = out(&dir, "bad.json");
    fs::write(
        &bad,
        r#"{"base": {"kind": "autonomous"},
            "rhs": {"shape": "cubic", "c0": {"mean": 0}, "c1": {"mean": 0}, "c2": {"mean": 0}, "c3": {"mean": 1}},
            "family": "additive", "sweep": {"lambda_min": -1, "lambda_max": 1, "steps": 5}}"#,
    )
    .unwrap();
    let p = out(&dir, "validation.json");
    assert_eq!(snbif(&["validate", "-s", bad.to_str().unwrap(), "-o", p.to_str().unwrap()]), EXIT_INVALID);
    assert!(read_json(&p)["checks"].is_array());
    assert_eq!(snbif(&["sweep", "-s", bad.to_str().unwrap(), "-o", p.to_str().unwrap()]), EXIT_INVALID);
}

#[test]
fn degraded_locate_still_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let p = out(&dir, "loc.json");
    // the count is 1 at both ends, so there is nothing to bisect
    let code = snbif(&["locate", "-s", &scenario("pure_cubic"), "--interval", "-1", "1", "-o", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_DEGRADED);
    assert!(!read_json(&p)["degraded"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(snbif(&["census", "-s", "/nonexistent/scenario.json", "--lambda", "0"]), EXIT_USAGE);
    assert_eq!(snbif(&["census", "--lambda", "0"]), EXIT_USAGE);
    assert_eq!(snbif(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(snbif(&["dc", "-s", &scenario("deadzone"), "--interval", "-1", "1"]), EXIT_USAGE);
}

#[test]
fn binary_runs_schwarzian() {
    let o = Command::new(env!("CARGO_BIN_EXE_snbif"))
        .args(["schwarzian", "-s", &scenario("double_saddle_node"), "--lambda", "0", "--x0", "0.5", "--t", "0.5"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["schwarzian"].as_f64().unwrap() < 0.0);
}
