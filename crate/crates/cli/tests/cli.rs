//! Exit-code contract and error surfacing of the `pw` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
        .display()
        .to_string()
}

fn pw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pw"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn passing_checks_exit_zero() {
    let out = pw(&["connection", &fixture("flat2d")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn failing_checks_exit_one() {
    let out = pw(&["compat", &fixture("nonpoisson_compat")]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("FAIL"));
}

#[test]
fn missing_manifest_is_a_structured_error() {
    let out = pw(&["validate", "/nonexistent/nowhere.json", "--output", "json"]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["error"]["message"].as_str().unwrap().contains("nowhere.json"));
}

#[test]
fn malformed_manifest_is_a_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{
            "charts": [{"name": "plane", "coords": ["x", "y"]}],
            "manifolds": [{
                "name": "m", "chart": "plane",
                "bivector": [{"i": 1, "j": 0, "expr": "x"}],
                "cometric": [{"i": 0, "j": 0, "expr": "1"}, {"i": 1, "j": 1, "expr": "1"}]
            }]
        }"#,
    )
    .unwrap();
    let out = pw(&["validate", path.to_str().unwrap(), "--output", "json"]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["error"]["message"]
        .as_str()
        .unwrap()
        .contains("i < j"));
}

#[test]
fn solver_commands_report_solutions() {
    let out = pw(&["solve-warp", "--lambda", "4", "--lambda-hat", "1", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["payload"]["f_value"], 2.0);
    assert_eq!(v["payload"]["kind"], "constant-warp");

    // a no-solution outcome is a valid answer, not a failed check
    let out = pw(&["solve-warp", "--lambda", "-1", "--lambda-hat", "2", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["payload"]["kind"], "no-solution");

    // hypothesis violations are errors
    let out = pw(&["solve-scalar", "--sb", "1", "--mu", "0", "--mu1", "3", "--s2", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_scalar_reads_base_curvature_from_manifest() {
    // the first manifold of the fixture has constant S_B = -2
    let out = pw(&[
        "solve-scalar",
        "--mu",
        "2",
        "--mu1",
        "6",
        "--s2",
        "2",
        &fixture("poisson_x"),
        "--output",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["payload"]["s_b"], -2.0);
    assert_eq!(v["payload"]["f_value"], 2.0);
    let checks = v["report"]["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .any(|c| c["name"].as_str().unwrap().contains("constant")));
}

#[test]
fn laplacian_without_tasks_is_an_error() {
    let out = pw(&["laplacian", &fixture("grw"), "--output", "json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_flags_the_broken_bivector() {
    let out = pw(&["validate", &fixture("nonpoisson_compat"), "--output", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = v["report"]["checks"].as_array().unwrap();
    let broken = checks
        .iter()
        .find(|c| c["name"].as_str().unwrap().contains("broken_so3"))
        .unwrap();
    assert_eq!(broken["passed"], false);
    let plane = checks
        .iter()
        .find(|c| c["name"].as_str().unwrap().contains("incompatible_plane"))
        .unwrap();
    assert_eq!(plane["passed"], true, "2-d bivectors are always Poisson");
}

#[test]
fn seed_changes_samples_but_not_verdicts() {
    let a = pw(&["connection", &fixture("poisson_x"), "--seed", "1", "--output", "json"]);
    let b = pw(&["connection", &fixture("poisson_x"), "--seed", "2", "--output", "json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
}
