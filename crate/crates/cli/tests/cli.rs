use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;
use tave_core::campaign::CampaignRow;
use tave_core::io::{tensor_from_json, tensor_to_json, vector_from_json, vector_to_json};
use tave_core::{DenseTensor, Matrix, TaveProblem, Vector};
use tempfile::TempDir;

fn tave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tave")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn assert_schema(name: &str, instance: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(instance) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{name} output violates schema: {msgs:?}\n{instance:#}");
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &Path, scenario: &str, p: &str, q: &str, n: &str, seed: &str) -> Output {
    tave(&["gen", "--scenario", scenario, "--p", p, "--q", q, "--n", n, "--seed", seed, "--out-dir", s(dir)])
}

#[test]
fn gen_writes_reloadable_planted_instance() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("inst");
    let out = gen(&dir, "MG", "3", "4", "4", "9");
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_schema("gen", &stdout_json(&out));

    let read = |name: &str| fs::read_to_string(dir.join(name)).unwrap();
    let a = tensor_from_json(&read("a.json")).unwrap();
    let b = tensor_from_json(&read("b_tensor.json")).unwrap();
    let rhs = vector_from_json(&read("rhs.json")).unwrap();
    let x_star = vector_from_json(&read("x_star.json")).unwrap();
    assert_eq!((a.order(), b.order(), a.dim()), (3, 4, 4));
    let problem = TaveProblem::new_unsymmetrized(a, b, rhs).unwrap();
    let r = problem.residual(&x_star).unwrap().norm();
    assert!(r <= 1e-13 * (1.0 + problem.rhs().norm()), "{r}");
}

#[test]
fn gen_is_byte_identical_for_a_seed() {
    let tmp = TempDir::new().unwrap();
    let (d1, d2, d3) = (tmp.path().join("1"), tmp.path().join("2"), tmp.path().join("3"));
    assert_eq!(code(&gen(&d1, "GG", "3", "3", "3", "5")), 0);
    assert_eq!(code(&gen(&d2, "GG", "3", "3", "3", "5")), 0);
    assert_eq!(code(&gen(&d3, "GG", "3", "3", "3", "6")), 0);
    for name in ["a.json", "b_tensor.json", "rhs.json", "x_star.json"] {
        assert_eq!(fs::read(d1.join(name)).unwrap(), fs::read(d2.join(name)).unwrap(), "{name}");
    }
    assert_ne!(fs::read(d1.join("a.json")).unwrap(), fs::read(d3.join("a.json")).unwrap());
}

#[test]
fn gen_rejects_unknown_scenario() {
    let tmp = TempDir::new().unwrap();
    let out = gen(tmp.path(), "MQ", "3", "3", "3", "0");
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("MQ"));
}

#[test]
fn solve_generated_instance() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    assert_eq!(code(&gen(dir, "MM", "3", "3", "5", "2")), 0);
    let out = tave(&[
        "solve",
        "--a",
        s(&dir.join("a.json")),
        "--b-tensor",
        s(&dir.join("b_tensor.json")),
        "--rhs",
        s(&dir.join("rhs.json")),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_schema("solve", &v);
    assert_eq!(v["status"], "Converged");
    assert!(v["err"].as_f64().unwrap() <= 1e-5);
    let hist = v["residual_history"].as_array().unwrap();
    assert_eq!(hist.len(), v["iterations"].as_u64().unwrap() as usize + 1);

    let report = dir.join("report.json");
    let out = tave(&[
        "solve",
        "--a",
        s(&dir.join("a.json")),
        "--b-tensor",
        s(&dir.join("b_tensor.json")),
        "--rhs",
        s(&dir.join("rhs.json")),
        "--x0",
        s(&dir.join("x_star.json")),
        "--out",
        s(&report),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["iterations"], 0);
}

#[test]
fn solve_budget_starved_run_exits_two() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    assert_eq!(code(&gen(dir, "GG", "3", "3", "8", "4")), 0);
    let out = tave(&[
        "solve",
        "--a",
        s(&dir.join("a.json")),
        "--b-tensor",
        s(&dir.join("b_tensor.json")),
        "--rhs",
        s(&dir.join("rhs.json")),
        "--max-iter",
        "1",
    ]);
    assert_eq!(code(&out), 2);
    let v = stdout_json(&out);
    assert_schema("solve", &v);
    assert_eq!(v["status"], "MaxIterations");
}

#[test]
fn solve_input_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let a = dir.join("a.json");
    let b3 = dir.join("b3.json");
    let rhs = dir.join("rhs.json");
    fs::write(&a, tensor_to_json(&DenseTensor::unit(3, 2).unwrap())).unwrap();
    fs::write(&b3, tensor_to_json(&DenseTensor::unit(3, 3).unwrap())).unwrap();
    fs::write(&rhs, vector_to_json(&Vector::ones(2))).unwrap();

    let out = tave(&["solve", "--a", s(&a), "--b-tensor", s(&b3), "--rhs", s(&rhs)]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("dim 2") && err.contains("dim 3"), "{err}");

    let bad = dir.join("bad.json");
    fs::write(&bad, r#"{"order":3,"dim":2,"values":[1]}"#).unwrap();
    let out = tave(&["solve", "--a", s(&bad), "--b-tensor", s(&a), "--rhs", s(&rhs)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("values"));

    let out = tave(&["solve", "--a", s(&a), "--b-tensor", s(&a), "--rhs", s(&dir.join("missing.json"))]);
    assert_eq!(code(&out), 1);

    let out = tave(&["solve", "--a", s(&a)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn check_reports_existence_for_identity_pair() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    let rhs = dir.join("rhs.json");
    let id = DenseTensor::unit(4, 2).unwrap();
    fs::write(&a, tensor_to_json(&id)).unwrap();
    fs::write(&b, tensor_to_json(&id.scaled(0.5))).unwrap();
    fs::write(&rhs, vector_to_json(&Vector::new(vec![1.0, -2.0]).unwrap())).unwrap();
    let out = tave(&["check", "--a", s(&a), "--b-tensor", s(&b), "--rhs", s(&rhs)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_schema("check", &v);
    let r = &v["report"];
    assert_eq!(r["theorem35_holds"], true);
    assert_eq!(r["left_inverse_exists"], true);
    assert!((r["g_inf_norm"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    assert!((r["lambda_a"].as_f64().unwrap() - 0.25).abs() < 1e-6);
    assert!(v["falsifier"].is_null());
}

#[test]
fn check_falsifies_copositivity_of_matrix_example() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a.json");
    let m = Matrix::from_rows(&[&[1.0, 4.0], &[1.0, -2.0]]).unwrap();
    fs::write(&a, tensor_to_json(&DenseTensor::from_matrix(&m).unwrap())).unwrap();
    let out = tave(&["check", "--a", s(&a), "--property", "copositive", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_schema("check", &v);
    let f = &v["falsifier"];
    assert_eq!(f["verdict"], "Falsified");
    let x: Vec<f64> = f["witness"]["x"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let form = x[0] * x[0] + 5.0 * x[0] * x[1] - 2.0 * x[1] * x[1];
    assert!(form < 0.0 && x.iter().all(|v| *v >= 0.0));

    let out = tave(&["check", "--a", s(&a), "--property", "p-tensor"]);
    let v = stdout_json(&out);
    assert_schema("check", &v);
    assert_eq!(v["falsifier"]["verdict"], "Falsified");
}

#[test]
fn check_verdicts_are_data_and_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a.json");
    fs::write(&a, tensor_to_json(&DenseTensor::from_matrix(&Matrix::identity(3)).unwrap())).unwrap();
    let out = tave(&["check", "--a", s(&a), "--property", "p-tensor", "--samples", "200"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("check", &v);
    assert_eq!(v["falsifier"]["verdict"], "NotFalsified");
    assert!(v["falsifier"]["note"].as_str().unwrap().contains("not a proof"));

    assert_eq!(code(&tave(&["check", "--a", s(&a), "--property", "bogus"])), 1);
    assert_eq!(code(&tave(&["check", "--a", s(&tmp.path().join("nope.json")), "--property", "p-tensor"])), 1);
    assert_eq!(code(&tave(&["check", "--a", s(&a)])), 1);
}

#[test]
fn bench_spec_file_regression_row() {
    let tmp = TempDir::new().unwrap();
    let spec = tmp.path().join("spec.json");
    fs::write(&spec, r#"{"scenario":"MM","p":3,"q":3,"n":5,"trials":100,"epsilon":0.1,"seed":2024,"tol":1e-5,"max_iter":2000}"#).unwrap();
    let out = tave(&["bench", "--spec", s(&spec), "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_schema("bench", &v);
    let rows: Vec<CampaignRow> = serde_json::from_value(v).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].stats.success_rate >= 0.9, "{:?}", rows[0].stats);

    let out = tave(&["bench", "--spec", s(&spec), "--format", "tsv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn bench_inline_smoke_and_formats() {
    let tmp = TempDir::new().unwrap();
    let start = Instant::now();
    let out = tave(&["bench", "--scenario", "GM", "--p", "3", "--q", "2", "--n", "4", "--trials", "1", "--seed", "1"]);
    assert!(start.elapsed().as_secs_f64() < 1.0);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let md = tmp.path().join("table.md");
    let out = tave(&[
        "bench", "--scenario", "MM", "--p", "3", "--q", "3", "--n", "3", "--trials", "5", "--format", "markdown", "--out",
        s(&md), "--sequential",
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(md).unwrap();
    assert!(text.contains("| (3,3,3) |"));

    let out = tave(&["bench", "--scenario", "MM", "--p", "3", "--q", "3", "--n", "3", "--trials", "6", "--format", "json"]);
    let rows: Vec<CampaignRow> = serde_json::from_slice(&out.stdout).unwrap();
    let again: Vec<CampaignRow> = serde_json::from_str(&serde_json::to_string(&rows).unwrap()).unwrap();
    assert_eq!(rows, again);
}

#[test]
fn bench_malformed_spec_exits_one() {
    let tmp = TempDir::new().unwrap();
    let spec = tmp.path().join("spec.json");
    fs::write(&spec, r#"{"scenario":"MM","p":3}"#).unwrap();
    let out = tave(&["bench", "--spec", s(&spec)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("q"));
    assert_eq!(code(&tave(&["bench"])), 1);
    assert_eq!(code(&tave(&["bench", "--scenario", "MM", "--p", "3"])), 1);
}

#[test]
fn usage_exit_codes() {
    assert_eq!(code(&tave(&["--help"])), 0);
    assert_eq!(code(&tave(&["--version"])), 0);
    assert_eq!(code(&tave(&[])), 1);
    assert_eq!(code(&tave(&["frobnicate"])), 1);
}
