//! Black-box tests of the installed binary: JSON shapes, exit codes, and
//! cross-invocation determinism. Everything here uses small sizes so the
//! whole file runs in seconds.

use std::process::{Command, Output};

fn invlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invlab"))
        .args(args)
        .output()
        .expect("binary must spawn")
}

fn json_of(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout must be one JSON document")
}

#[test]
fn constants_reports_schema_and_config() {
    let doc = json_of(&invlab(&["constants", "--family", "ordered"]));
    assert_eq!(doc["schema"], "1");
    assert_eq!(doc["config"]["command"], "constants");
    assert_eq!(doc["config"]["resolved"], "ordered");
    assert!((doc["tau"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((doc["c_phi"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn poly_prints_exact_coefficients() {
    let doc = json_of(&invlab(&["poly", "--family", "ordered", "--n", "3"]));
    // 12 labelled ordered trees on 2 shapes: J_3 = 3 + 4q + 4q^2 + q^3
    // (q^0 term = increasing trees, the odd double factorial 1*3)
    assert_eq!(doc["coeffs"]["0"], "3");
    assert_eq!(doc["coeffs"]["1"], "4");
    assert_eq!(doc["coeffs"]["2"], "4");
    assert_eq!(doc["coeffs"]["3"], "1");
    assert_eq!(doc["total"], "12");
}

#[test]
fn local_closed_form_equals_generic_route() {
    let a = json_of(&invlab(&["local", "--family", "unordered", "--n", "7", "--j", "4"]));
    let b = json_of(&invlab(&[
        "local", "--family", "unordered", "--n", "7", "--j", "4", "--closed-form",
    ]));
    assert_eq!(a["probs"], b["probs"]);
}

#[test]
fn float_backend_prints_numbers() {
    let doc = json_of(&invlab(&[
        "local", "--family", "ordered", "--n", "9", "--j", "2", "--backend", "float",
    ]));
    assert!(doc["probs"][0].is_f64());
    let total: f64 = doc["probs"].as_array().unwrap().iter().map(|p| p.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn usage_error_exits_two() {
    let out = invlab(&["poly", "--family", "ordered"]); // missing --n
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computation_error_exits_one_with_hint() {
    let out = invlab(&["constants", "--family", "septenary"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown family"), "stderr: {err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn verify_rejects_unknown_suite() {
    let out = invlab(&["verify", "--suite", "vibes"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sample_is_reproducible_across_invocations_and_threads() {
    let args = [
        "sample", "--family", "cyclic", "--n", "60", "--reps", "400", "--seed", "31",
    ];
    let once = invlab(&args);
    let twice = invlab(&args);
    let threaded = invlab(&[&args[..], &["--threads", "3"]].concat());
    assert!(once.status.success());
    assert_eq!(once.stdout, twice.stdout);
    assert_eq!(once.stdout, threaded.stdout);
}

#[test]
fn sample_histogram_csv_is_written() {
    let dir = std::env::temp_dir().join("invlab-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("hist.csv");
    let out = invlab(&[
        "sample", "--family", "ordered", "--n", "20", "--j", "5", "--reps", "200",
        "--seed", "5", "--emit-histogram", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("k,count\n"));
    let reps: u64 = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(reps, 200);
    std::fs::remove_file(&path).ok();
}

#[test]
fn custom_family_file_resolves() {
    let dir = std::env::temp_dir().join("invlab-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("family.json");
    std::fs::write(&path, r#"{"name":"caterpillar","weights":["1","1/3","1/7"],"radius_hint":4.0}"#)
        .unwrap();
    let doc = json_of(&invlab(&["poly", "--family", path.to_str().unwrap(), "--n", "3"]));
    assert_eq!(doc["config"]["resolved"], "caterpillar");
    // total = 3! [z^3] T(z): T = z(1 + T/3 + T^2/7), t3 = 1/9 + 1/7 = 16/63
    assert_eq!(doc["total"], "32/21");
    std::fs::remove_file(&path).ok();
}
