use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use toric_height::cli::spec::{normalize, parse_spec};

const TENT: &str = r#"{"divisor":{"a0":0,"a_inf":1},"metric":{"type":"difference",
  "plus":{"divisor":{"a0":0,"a_inf":1},"metric":{"type":"canonical"}},
  "minus":{"divisor":{"a0":0,"a_inf":0},"metric":{"type":"pwl","breakpoints":[-0.4,0,0.4],"values":[0,0.4,0]}}}}"#;
const CANONICAL: &str = r#"{"divisor":{"a0":0,"a_inf":1},"metric":{"type":"canonical"}}"#;
const FUBINI_STUDY: &str = r#"{"divisor":{"a0":0,"a_inf":1},"metric":{"type":"fubini_study"}}"#;
const SCALED: &str = r#"{"divisor":{"a0":1,"a_inf":1},"metric":{"type":"scaled","base":{"type":"canonical"},"c":0.3}}"#;

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_toric-height"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn verify_tent() {
    let out = run(&["verify", "-"], TENT);
    assert_eq!(out.status.code(), Some(0));
    let report = &json(&out)["result"]["report"];
    let keys: Vec<&str> = report
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    assert_eq!(
        keys,
        [
            "chi_volume",
            "energy",
            "gap",
            "height",
            "orthogonality_residual"
        ]
    );
    assert!((report["height"].as_f64().unwrap()).abs() <= 1e-12);
    assert!((report["chi_volume"].as_f64().unwrap() - 0.2).abs() <= 1e-12);
    assert!((report["gap"].as_f64().unwrap() - 0.2).abs() <= 1e-12);
}

#[test]
fn verify_canonical_is_all_zero() {
    let out = run(&["verify", "-"], CANONICAL);
    assert_eq!(out.status.code(), Some(0));
    for (_, v) in json(&out)["result"]["report"].as_object().unwrap() {
        assert_eq!(v.as_f64(), Some(0.0));
    }
}

#[test]
fn tightened_tolerance_fails() {
    let out = run(&["verify", "-", "--tol", "-1"], TENT);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["result"]["passed"], Value::Bool(false));
    let out = run(&["suite", "--trials", "20", "--tol", "1e-300"], "");
    assert_eq!(out.status.code(), Some(1));
    assert!(!json(&out)["result"]["failures"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn invalid_input_exits_2() {
    let not_nef = r#"{"divisor":{"a0":-1,"a_inf":0},"metric":{"type":"canonical"}}"#;
    assert_eq!(run(&["height", "-"], not_nef).status.code(), Some(2));
    assert_eq!(run(&["height", "-"], "{").status.code(), Some(2));
    assert_eq!(run(&["height"], "").status.code(), Some(2));
    assert_eq!(run(&["frobnicate", "-"], CANONICAL).status.code(), Some(2));
    assert_eq!(
        run(&["converge", "-", "--widths", "0.1,0.2"], TENT)
            .status
            .code(),
        Some(2)
    );
    let bad_grid = run(&["chivol", "-", "--grid-points", "1"], FUBINI_STUDY);
    assert_eq!(bad_grid.status.code(), Some(2));
}

#[test]
fn roof_of_tent_as_table() {
    let out = run(&["roof", "-", "--format", "table"], TENT);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["0\t0", "0.5\t0.20000000000000001", "1\t0"]);
}

#[test]
fn scalars_and_curves() {
    let out = run(&["height", "-"], SCALED);
    assert_eq!(json(&out)["result"]["height"].as_f64(), Some(1.2));
    let out = run(&["chivol", "-"], SCALED);
    assert_eq!(json(&out)["result"]["chi_volume"].as_f64(), Some(1.2));

    let env = json(&run(&["envelope", "-"], TENT));
    let points = env["result"]["points"].as_array().unwrap();
    let pairs: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p["u"].as_f64().unwrap(), p["psi"].as_f64().unwrap()))
        .collect();
    assert_eq!(pairs, [(-0.4, -0.4), (0.4, 0.0)]);
    assert_eq!(env["result"]["slope_left"].as_f64(), Some(1.0));

    let measure = json(&run(&["measure", "-"], TENT));
    let atoms = measure["result"]["atoms"].as_array().unwrap();
    let masses: Vec<f64> = atoms.iter().map(|a| a["mass"].as_f64().unwrap()).collect();
    assert_eq!(masses, [1.0, -1.0, 1.0]);
    assert_eq!(measure["result"]["total_mass"].as_f64(), Some(1.0));
}

#[test]
fn settings_are_echoed() {
    let out = run(
        &[
            "chivol",
            "-",
            "--grid-halfwidth",
            "15",
            "--grid-points",
            "3001",
        ],
        FUBINI_STUDY,
    );
    let settings = &json(&out)["settings"];
    assert_eq!(settings["grid_half_width"].as_f64(), Some(15.0));
    assert_eq!(settings["grid_points"].as_u64(), Some(3001));
    assert_eq!(settings["seed"].as_u64(), Some(42));
    assert_eq!(settings["command"], "chivol");
}

#[test]
fn converge_reports_limit_row() {
    let out = run(&["converge", "-"], TENT);
    assert_eq!(out.status.code(), Some(0));
    let result = &json(&out)["result"];
    assert_eq!(result["rows"].as_array().unwrap().len(), 3);
    assert_eq!(result["limit"]["width"].as_f64(), Some(0.0));
    assert_eq!(result["passed"], Value::Bool(true));
}

#[test]
fn reports_are_byte_identical() {
    for args in [
        &["verify", "-"][..],
        &["roof", "-", "--format", "table"][..],
        &["converge", "-"][..],
    ] {
        let a = run(args, FUBINI_STUDY);
        let b = run(args, FUBINI_STUDY);
        assert_eq!(a.stdout, b.stdout);
    }
    let a = run(&["suite", "--trials", "200", "--seed", "7"], "");
    let b = run(&["suite", "--trials", "200", "--seed", "7"], "");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("tent.json");
    std::fs::write(&spec, TENT).unwrap();
    let dest = dir.path().join("roof.tsv");
    let out = run(
        &[
            "roof",
            spec.to_str().unwrap(),
            "--format",
            "table",
            "--output",
            dest.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(dest)
        .unwrap()
        .contains("0.5\t0.20000000000000001"));
}

#[test]
fn fixture_specs_normalize_idempotently() {
    for text in [TENT, CANONICAL, FUBINI_STUDY, SCALED] {
        let once = normalize(&parse_spec(text).unwrap());
        let twice = normalize(&parse_spec(&once).unwrap());
        assert_eq!(once, twice);
    }
}
