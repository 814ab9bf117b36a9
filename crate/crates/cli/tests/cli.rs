use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilstrat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = run(&full);
    let value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("invalid JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    });
    (out.status.code().expect("exit code"), value)
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

#[test]
fn validate_reports_series() {
    let (code, v) = json(&["validate", &path("h3.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["lower_central_series"], serde_json::json!([3, 1, 0]));
    assert_eq!(v["nilpotent"], true);

    let (code, v) = json(&["validate", &path("so3.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["nilpotent"], false);
    assert_eq!(v["solvable"], false);
}

#[test]
fn malformed_input_is_an_input_error() {
    let out = run(&["validate", &path("bad_index.json")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("index out of range"));

    let (code, v) = json(&["stratum", &path("bad_index.json")]);
    assert_eq!(code, 3);
    assert!(v["error"].as_str().unwrap().contains("index out of range"));

    let out = run(&["validate", &path("does_not_exist.json")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn stratum_golden_labels() {
    let (code, v) = json(&["stratum", &path("h3.json")]);
    assert_eq!(code, 0);
    let cert = &v["detection"]["certificate"];
    assert_eq!(cert["beta"], serde_json::json!(["-1", "-1", "1"]));
    assert_eq!(cert["eigenvalue_type"], serde_json::json!([1, 1, 2]));
    assert_eq!(cert["q_value"], "1/3");
    assert_eq!(cert["all_passed"], true);

    let (code, v) = json(&["stratum", &path("n4.json")]);
    assert_eq!(code, 0);
    let cert = &v["detection"]["certificate"];
    assert_eq!(cert["beta"], serde_json::json!(["-1", "-1/2", "0", "1/2"]));
    assert_eq!(cert["eigenvalue_type"], serde_json::json!([1, 2, 3, 4]));
    assert_eq!(cert["q_value"], "2/3");
}

#[test]
fn stratum_of_skewed_basis_flows_to_the_same_label() {
    let (code, v) = json(&["stratum", "--probe", &path("n4_skewed.json")]);
    assert_eq!(code, 0);
    let det = &v["detection"];
    assert_eq!(det["certified"], true);
    assert!(det["flow"]["iterations"].as_u64().unwrap() > 0);
    assert_eq!(det["certificate"]["beta"], serde_json::json!(["-1", "-1/2", "0", "1/2"]));
    assert_eq!(v["semistability_probe"]["verdict"], "semistable");
}

#[test]
fn stratum_flags_so3_and_rejects_zero() {
    let (code, v) = json(&["stratum", &path("so3.json")]);
    assert_eq!(code, 2);
    let checks = v["detection"]["certificate"]["checks"].as_array().unwrap();
    let shift = checks.iter().find(|c| c["name"] == "beta_positive_shift").unwrap();
    assert_eq!(shift["passed"], false);

    let out = run(&["stratum", &path("zero.json")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero bracket"));
}

#[test]
fn flow_trace_is_written() {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let trace = dir.join("n4_skewed_trace.csv");
    let out = run(&["stratum", "--trace", trace.to_str().unwrap(), &path("n4_skewed.json")]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&trace).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iter,objective,tangency"));
    assert!(lines.count() > 1);
}

#[test]
fn einstein_verdicts() {
    let (code, v) = json(&["einstein", "--audit", &path("ch2.json")]);
    assert_eq!(code, 0);
    let e = &v["curvature"]["einstein"];
    assert_eq!(e["verdict"], true);
    assert!((e["c"].as_f64().unwrap() + 1.5).abs() < 1e-9);
    assert_eq!(v["curvature"]["standard"]["verdict"], true);
    for term in ["lhs", "term1", "term2", "term3"] {
        assert!(v["audit"][term].as_f64().unwrap().abs() < 1e-8, "{term}");
    }

    for file in ["rh3.json", "rh3_gram.json"] {
        let (code, v) = json(&["einstein", &path(file)]);
        assert_eq!(code, 0, "{file}");
        assert!((v["curvature"]["einstein"]["c"].as_f64().unwrap() + 2.0).abs() < 1e-9);
    }

    let (code, v) = json(&["einstein", &path("nonstd_attempt.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["curvature"]["einstein"]["verdict"], false);
    assert_eq!(v["curvature"]["standard"]["verdict"], false);
}

#[test]
fn extension_round_trips_through_a_file() {
    let out_file = Path::new(env!("CARGO_TARGET_TMPDIR")).join("h3_extension.json");
    let (code, v) = json(&["extend", "--out", out_file.to_str().unwrap(), &path("h3.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["eigenvalue_type"], serde_json::json!([1, 1, 2]));
    let (code, v) = json(&["einstein", out_file.to_str().unwrap()]);
    assert_eq!(code, 0);
    let e = &v["curvature"]["einstein"];
    assert_eq!(e["verdict"], true);
    assert!((e["c"].as_f64().unwrap() + 1.5).abs() < 1e-9);
}

#[test]
fn extension_requires_a_nilsoliton_unless_flowed() {
    let (code, _) = json(&["extend", &path("n4_skewed.json")]);
    assert_eq!(code, 2);
    let (code, v) = json(&["extend", "--flow-first", &path("n4_skewed.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["einstein"]["verdict"], true);
    assert_eq!(v["standard"]["verdict"], true);
}

#[test]
fn abelian_extension_is_real_hyperbolic() {
    let (code, v) = json(&["extend", &path("zero.json")]);
    assert_eq!(code, 0);
    assert!((v["einstein"]["c"].as_f64().unwrap() + 3.0).abs() < 1e-9);
    let (_, v) = json(&["extend", "--c", "-1", &path("zero.json")]);
    assert!((v["einstein"]["c"].as_f64().unwrap() + 1.0).abs() < 1e-9);
}

#[test]
fn minnorm_with_brute_force_check() {
    let (code, v) = json(&["minnorm", "--check", &path("points_face.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["point"], serde_json::json!(["1/2", "1/2"]));
    assert_eq!(v["support"], serde_json::json!([1, 2]));
    assert_eq!(v["brute_force_agrees"], true);

    let (code, v) = json(&["minnorm", "--check", &path("points_h3.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["point"], serde_json::json!(["-1", "-1", "1"]));
}

#[test]
fn json_output_is_deterministic() {
    for args in [
        vec!["stratum", "--probe"],
        vec!["einstein", "--audit"],
        vec!["extend", "--flow-first"],
    ] {
        let mut full = vec!["--format", "json"];
        full.extend(args);
        full.push("n4_skewed.json");
        let dir = data("");
        let first = Command::new(env!("CARGO_BIN_EXE_nilstrat"))
            .current_dir(&dir)
            .args(&full)
            .output()
            .unwrap();
        let second = Command::new(env!("CARGO_BIN_EXE_nilstrat"))
            .current_dir(&dir)
            .args(&full)
            .output()
            .unwrap();
        assert!(!first.stdout.is_empty());
        assert_eq!(first.stdout, second.stdout, "{full:?}");
    }
}

#[test]
fn batch_reports_every_file_in_order() {
    let dir = path("");
    let (serial_code, serial) = json(&["batch", &dir]);
    let (parallel_code, parallel) = json(&["batch", "--jobs", "4", &dir]);
    assert_eq!(serial, parallel);
    assert_eq!(serial_code, parallel_code);
    // bad_index is an input error, so the batch as a whole is one too.
    assert_eq!(serial_code, 3);
    let results = serial["results"].as_array().unwrap();
    let names: Vec<&str> = results.iter().map(|r| r["file"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    let exit_of = |stem: &str| {
        results
            .iter()
            .find(|r| r["file"].as_str().unwrap().ends_with(stem))
            .map(|r| r["exit"].as_i64().unwrap())
            .unwrap()
    };
    assert_eq!(exit_of("/h3.json"), 0);
    assert_eq!(exit_of("/so3.json"), 2);
    assert_eq!(exit_of("/bad_index.json"), 3);
    // μ = 0 has no stratum, so batch only validates it.
    assert_eq!(exit_of("/zero.json"), 0);
    assert_eq!(exit_of("/points_face.json"), 0);
}
