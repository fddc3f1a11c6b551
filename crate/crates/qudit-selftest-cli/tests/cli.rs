//! End-to-end tests of the binary: exit codes, report shapes against the
//! shipped JSON schemas, and the documented flag surface.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_qudit-selftest")
}

fn run(args: &[&str]) -> Output {
    Command::new(exe()).args(args).output().expect("binary runs")
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn load_schema(name: &str) -> Value {
    let text = std::fs::read_to_string(schema_dir().join(name))
        .unwrap_or_else(|e| panic!("schema {name}: {e}"));
    serde_json::from_str(&text).unwrap()
}

// -- minimal JSON-schema checker (type / required / properties / items /
//    min-max items / $ref into definitions), enough for the shipped schemas

fn resolve<'a>(root: &'a Value, schema: &'a Value) -> &'a Value {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let path = r.trim_start_matches("#/");
        let mut cur = root;
        for seg in path.split('/') {
            cur = cur.get(seg).expect("dangling $ref");
        }
        cur
    } else {
        schema
    }
}

fn type_matches(ty: &str, v: &Value) -> bool {
    match ty {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        _ => false,
    }
}

fn validate(root: &Value, schema: &Value, v: &Value, path: &str, errors: &mut Vec<String>) {
    let schema = resolve(root, schema);
    if let Some(ty) = schema.get("type") {
        let ok = match ty {
            Value::String(s) => type_matches(s, v),
            Value::Array(options) => options
                .iter()
                .any(|t| t.as_str().map(|s| type_matches(s, v)).unwrap_or(false)),
            _ => true,
        };
        if !ok {
            errors.push(format!("{path}: expected type {ty}, got {v}"));
            return;
        }
    }
    if let Some(req) = schema.get("required").and_then(Value::as_array) {
        for key in req.iter().filter_map(Value::as_str) {
            if v.get(key).is_none() {
                errors.push(format!("{path}: missing required field '{key}'"));
            }
        }
    }
    if let (Some(props), Some(obj)) = (
        schema.get("properties").and_then(Value::as_object),
        v.as_object(),
    ) {
        for (key, sub) in props {
            if let Some(val) = obj.get(key) {
                validate(root, sub, val, &format!("{path}.{key}"), errors);
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        if let Some(min) = schema.get("minItems").and_then(Value::as_u64) {
            if (arr.len() as u64) < min {
                errors.push(format!("{path}: fewer than {min} items"));
            }
        }
        if let Some(max) = schema.get("maxItems").and_then(Value::as_u64) {
            if (arr.len() as u64) > max {
                errors.push(format!("{path}: more than {max} items"));
            }
        }
        for (i, item) in arr.iter().enumerate() {
            validate(root, items, item, &format!("{path}[{i}]"), errors);
        }
    }
}

fn assert_valid(schema_name: &str, v: &Value) {
    let schema = load_schema(schema_name);
    let mut errors = Vec::new();
    validate(&schema, &schema, v, "$", &mut errors);
    assert!(errors.is_empty(), "{schema_name}: {errors:#?}");
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

// -- identities ---------------------------------------------------------

#[test]
fn identities_pass_d5() {
    let out = run(&["identities", "--d", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_valid("identities_report.schema.json", &v);
    assert_eq!(v["pass"], Value::Bool(true));
}

#[test]
fn identities_pass_d3_includes_qutrit_sopo() {
    let out = run(&["identities", "--d", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_valid("identities_report.schema.json", &v);
    assert!(v["sopo_c_residual"].as_f64().unwrap() <= 1e-9);
    assert!(v["qutrit_phase_residuals"].is_array());
}

#[test]
fn identities_rejects_even_d() {
    let out = run(&["identities", "--d", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("odd prime"), "stderr: {msg}");
}

#[test]
fn identities_unattainable_tolerance_exits_2() {
    let out = run(&["identities", "--d", "5", "--tol-identity", "1e-30"]);
    assert_eq!(out.status.code(), Some(2));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], Value::Bool(false));
    assert!(!v["failures"].as_array().unwrap().is_empty());
}

#[test]
fn identities_accepts_custom_cubic_nu() {
    let path = std::env::temp_dir().join("qudit_selftest_custom_nu.json");
    std::fs::write(&path, "[0, 2, 1, 4]").unwrap();
    let out = run(&["identities", "--d", "7", "--nu", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert_eq!(v["pass"], Value::Bool(true));
    // degenerate coefficients are a config error, not a math failure
    std::fs::write(&path, "[0, 2, 1]").unwrap();
    let out = run(&["identities", "--d", "7", "--nu", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

// -- bounds -------------------------------------------------------------

#[test]
fn bounds_d3_certificate() {
    let out = run(&["bounds", "--d", "3", "--method", "exhaustive"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_valid("bounds_report.schema.json", &v);
    let cert = &v["certificates"][0];
    assert_valid("lhv_certificate.schema.json", cert);
    assert!(cert["gap"].as_f64().unwrap() >= 0.36);
    assert!(cert["best_value"].as_f64().unwrap() < 5.640);
}

#[test]
fn bounds_d11_sampled_labeled_non_exhaustive() {
    let out = run(&[
        "bounds", "--d", "11", "--method", "sampled", "--seeds", "1,2,3", "--starts", "8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let certs = v["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 3);
    for c in certs {
        assert_valid("lhv_certificate.schema.json", c);
        assert_eq!(c["exhaustive"], Value::Bool(false));
        assert!(c["method"].as_str().unwrap().starts_with("sampled"));
    }
}

#[test]
fn bounds_csv_format() {
    let out = run(&["bounds", "--d", "3", "--method", "exhaustive", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("d,method,best_value,quantum_value,gap,assignments_examined,seed"));
}

#[test]
fn bounds_infeasible_method_is_config_error() {
    let out = run(&["bounds", "--d", "11", "--method", "exhaustive"]);
    assert_eq!(out.status.code(), Some(1));
}

// -- selftest -----------------------------------------------------------

#[test]
fn selftest_ideal_row_is_exact() {
    let out = run(&["selftest", "--d", "5", "--seeds", "1", "--magnitudes", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_valid("selftest_report.schema.json", &v);
    let row = &v["rows"][0];
    assert!(row["state_distance"].as_f64().unwrap() <= 1e-9);
    assert_eq!(row["bound_satisfied"], Value::Bool(true));
}

#[test]
fn selftest_out_of_regime_rows_flag_not_fail() {
    // d = 3 at magnitude 1e-2 sits above the proven-regime threshold
    let out = run(&["selftest", "--d", "3", "--seeds", "1,2", "--magnitudes", "0.01"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row["in_regime"], Value::Bool(false));
    }
    assert_eq!(v["pass"], Value::Bool(true));
}

#[test]
fn selftest_twenty_seeds_d5_all_bounds() {
    let seeds: Vec<String> = (1..=20).map(|s| s.to_string()).collect();
    let out = run(&[
        "selftest",
        "--d",
        "5",
        "--seeds",
        &seeds.join(","),
        "--magnitudes",
        "0.001",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 20);
    for row in rows {
        assert_eq!(row["bound_satisfied"], Value::Bool(true));
    }
}

#[test]
fn selftest_reads_strategy_file() {
    use qudit_selftest::nu::NuSpec;
    use qudit_selftest::strategy::ideal_strategy;
    use qudit_selftest::zmod::PrimeDim;
    let p = PrimeDim::new(3).unwrap();
    let s = ideal_strategy(p, &NuSpec::canonical(p)).unwrap();
    let path = std::env::temp_dir().join("qudit_selftest_cli_strategy.json");
    std::fs::write(&path, s.to_json()).unwrap();
    let out = run(&[
        "selftest", "--d", "3", "--seeds", "1", "--magnitudes", "0",
        "--strategy", path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert!(v["rows"][0]["state_distance"].as_f64().unwrap() <= 1e-9);

    // malformed strategy file is a config error
    std::fs::write(&path, "{ not json").unwrap();
    let out = run(&[
        "selftest", "--d", "3", "--seeds", "1", "--magnitudes", "0",
        "--strategy", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn selftest_rejects_unknown_noise() {
    let out = run(&["selftest", "--d", "3", "--noise", "cosmic-rays"]);
    assert_eq!(out.status.code(), Some(1));
}

// -- sweep --------------------------------------------------------------

#[test]
fn sweep_header_and_ratio_range() {
    let out = run(&["sweep", "--d", "5", "--seeds", "1,2", "--magnitudes", "0.001"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "d,seed,magnitude,epsilon,state_distance,delta_bound,ratio,max_c_norm,gamma"
    );
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 9);
        let ratio: f64 = cols[6].parse().unwrap();
        assert!((0.0..=1.0).contains(&ratio), "ratio {ratio} out of range");
    }
}

#[test]
fn thread_cap_env_is_honored() {
    let out = Command::new(exe())
        .env("SELFTEST_THREADS", "1")
        .args(["bounds", "--d", "5", "--method", "best-response-exhaustive"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
