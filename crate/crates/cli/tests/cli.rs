use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_utgrading");

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

#[test]
fn validate_prints_component_dims() {
    let out = run(&["validate", "-i", fixture("inputs/elementary_ut21_z3.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert_eq!(v["dim"], 7);
    let dims: Vec<u64> = v["components"].as_array().unwrap().iter().map(|c| c["dim"].as_u64().unwrap()).collect();
    assert_eq!(dims, vec![3, 2, 2]);
}

#[test]
fn decompose_check_on_generated_instance() {
    let tmp = tempfile::tempdir().unwrap();
    let g = tmp.path().join("g.json");
    let cf = tmp.path().join("cf.json");
    let plan = fixture("plans/klein_pauli_1-2.json");
    assert!(run(&["generate", "--plan", plan.to_str().unwrap(), "-o", g.to_str().unwrap()]).status.success());
    let out = run(&["decompose", "-i", g.to_str().unwrap(), "-o", cf.to_str().unwrap(), "--check"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&std::fs::read(&cf).unwrap());
    assert!(v["certificate"].as_object().unwrap().values().all(|b| b == &Value::Bool(true)));
    assert_eq!(v["certificate"]["graded_iso"], true);
    assert_eq!(v["blocks_prime"], serde_json::json!([1, 2]));

    // the canonical form checks against its own input without an explicit map
    let out = run(&["verify-iso", "-a", cf.to_str().unwrap(), "-b", g.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn corrupted_map_reports_a_multiplicativity_witness() {
    let tmp = tempfile::tempdir().unwrap();
    let g = tmp.path().join("g.json");
    let cf = tmp.path().join("cf.json");
    let map = tmp.path().join("map.json");
    let input = fixture("inputs/scrambled_ut11_z2.json");
    let input = input.to_str().unwrap();
    assert!(run(&["decompose", "-i", input, "-o", cf.to_str().unwrap()]).status.success());
    std::fs::copy(input, &g).unwrap();
    let mut m = json(&std::fs::read(&cf).unwrap())["psi_matrix"].clone();
    // scale one entry of the unit's image; rank survives, products do not
    m[0][0] = Value::String("2".into());
    std::fs::write(&map, serde_json::json!({"format": 1, "matrix": m}).to_string()).unwrap();
    let out = run(&["verify-iso", "-a", cf.to_str().unwrap(), "-b", g.to_str().unwrap(), "-m", map.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = json(&out.stderr);
    assert_eq!(err["error"]["kind"], "NotGradedIsomorphism");
    assert_eq!(err["error"]["detail"]["kind"], "NotMultiplicative");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["decompose"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn missing_input_is_an_io_error() {
    let out = run(&["validate", "-i", "/nonexistent/grading.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out.stderr)["error"]["kind"], "Io");
}
