//! End-to-end tests of the `hardycert` binary: report contents, exit codes,
//! and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const CANONICAL: &str = r#"{
  "q": 1.0,
  "r": 1.0,
  "u": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 0.0}],
  "v": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 2.0}],
  "w": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 0.0}]
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hardycert"))
}

fn write_spec(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn near(v: &Value, expected: f64) -> bool {
    v.as_f64().is_some_and(|x| (x - expected).abs() <= 1e-6 * expected.abs())
}

#[test]
fn criteria_canonical_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "canonical.json", CANONICAL);
    let out = run(&["criteria", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rep = stdout_json(&out);
    assert_eq!(rep["regime"], "r_ge_1");
    let vals = &rep["values"];
    assert!(near(&vals["G1"], 0.5), "G1 = {}", vals["G1"]);
    assert!(near(&vals["G2"], 0.25), "G2 = {}", vals["G2"]);
    assert!(near(&vals["G3"], 1.0), "G3 = {}", vals["G3"]);
    assert!(near(&vals["D1"], 0.5), "D1 = {}", vals["D1"]);
    assert!(near(&vals["D2"], 0.25), "D2 = {}", vals["D2"]);
    assert!(near(&vals["O1"], 0.5), "O1 = {}", vals["O1"]);
    assert!(near(&vals["O2"], 0.25), "O2 = {}", vals["O2"]);
    assert!(near(&vals["A"], 0.5), "A = {}", vals["A"]);
    assert!(near(&vals["B"], 1.0), "B = {}", vals["B"]);
    assert!(near(&rep["aggregate"], 1.75), "aggregate = {}", rep["aggregate"]);
    assert_eq!(rep["finite"]["G3"], true);
    // elapsed time goes to stderr, never into the report
    assert!(String::from_utf8_lossy(&out.stderr).contains("elapsed"));
}

#[test]
fn criteria_divergent_instance_reports_inf() {
    let dir = tempfile::tempdir().unwrap();
    // decaying v has a vanishing non-decreasing envelope
    let spec = write_spec(
        dir.path(),
        "decaying.json",
        r#"{
          "q": 1.0, "r": 1.0,
          "u": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 0.0}],
          "v": [{"lo": 0.0, "hi": 1.0, "coeff": 1.0, "exponent": 0.0},
                {"lo": 1.0, "hi": null, "coeff": 1.0, "exponent": -0.5}],
          "w": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 0.0}]
        }"#,
    );
    let out = run(&["criteria", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let rep = stdout_json(&out);
    assert_eq!(rep["aggregate"], "inf");
    assert_eq!(rep["finite"]["G3"], false);
}

#[test]
fn oracle_canonical_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "canonical.json", CANONICAL);
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    for out_path in [&out_a, &out_b] {
        let out = run(&[
            "oracle",
            "--spec",
            spec.to_str().unwrap(),
            "--seed",
            "7",
            "--atoms",
            "4",
            "--iters",
            "50",
            "--restarts",
            "1",
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b, "identical runs must produce byte-identical reports");
    let res: Value = serde_json::from_slice(&a).unwrap();
    assert!(near(&res["best_ratio"], 0.5), "best_ratio = {}", res["best_ratio"]);
    assert_eq!(res["exactness"], "exact_convex");
    assert_eq!(res["seed"], 7);
}

#[test]
fn partition_canonical_u() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "canonical.json", CANONICAL);
    let out = run(&[
        "partition",
        "--spec",
        spec.to_str().unwrap(),
        "--kmin",
        "0",
        "--kmax",
        "2",
    ]);
    assert_eq!(code(&out), 0);
    let rep = stdout_json(&out);
    // u == 1 on (0, inf): x_k = 2^k, infinite total mass
    assert_eq!(rep["total_mass"], "inf");
    assert_eq!(rep["M"], Value::Null);
    assert_eq!(rep["truncated"], true);
    let points = rep["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    for (point, (k, x)) in points.iter().zip([(0, 1.0), (1, 2.0), (2, 4.0)]) {
        assert_eq!(point["k"], k);
        assert!(near(&point["x"], x), "x_{k} = {}", point["x"]);
        assert!(near(&point["cumulative"], x));
    }
}

#[test]
fn verify_small_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let out = run(&[
        "verify",
        "--count",
        "2",
        "--seed",
        "11",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let c = code(&out);
    assert!(c == 0 || c == 1, "unexpected exit code {c}");
    let rep = stdout_json(&out);
    assert_eq!(rep["count"], 2);
    assert_eq!(rep["instances"].as_array().unwrap().len(), 2);
    let verdict = rep["verdict"].as_str().unwrap();
    assert_eq!(verdict == "pass", c == 0);
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("index,seed,q,r,"));
    assert_eq!(csv_text.lines().count(), 3);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let garbled = write_spec(dir.path(), "garbled.json", "{ not json");
    let out = run(&["criteria", "--spec", garbled.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let missing = dir.path().join("missing.json");
    let out = run(&["criteria", "--spec", missing.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let spec = write_spec(dir.path(), "canonical.json", CANONICAL);
    let out = run(&["oracle", "--spec", spec.to_str().unwrap(), "--atoms", "0"]);
    assert_eq!(code(&out), 2);

    let out = run(&[
        "partition",
        "--spec",
        spec.to_str().unwrap(),
        "--kmin",
        "3",
        "--kmax",
        "1",
    ]);
    assert_eq!(code(&out), 2);

    let out = run(&["verify", "--count", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn invariant_violations_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // negative coefficient: parses, but is not a weight
    let negative = write_spec(
        dir.path(),
        "negative.json",
        r#"{
          "q": 1.0, "r": 1.0,
          "u": [{"lo": 0.0, "hi": null, "coeff": -1.0, "exponent": 0.0}],
          "v": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 2.0}],
          "w": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 0.0}]
        }"#,
    );
    let out = run(&["criteria", "--spec", negative.to_str().unwrap()]);
    assert_eq!(code(&out), 3);

    // non-integrable head: u ~ x^-1.5 near zero
    let head = write_spec(
        dir.path(),
        "head.json",
        r#"{
          "q": 1.0, "r": 1.0,
          "u": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": -1.5}],
          "v": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 2.0}],
          "w": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 0.0}]
        }"#,
    );
    let out = run(&["criteria", "--spec", head.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}
