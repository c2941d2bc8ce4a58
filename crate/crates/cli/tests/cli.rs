//! End-to-end tests of the binary: subcommands, exit codes, output schemas,
//! and byte-stable experiment artifacts.

use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graph-frechet"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Minimal JSON-schema checker covering the subset the shipped schemas use:
/// type, required, properties, items, enum.
fn validate(schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "boolean" => value.is_boolean(),
            "number" => value.is_number(),
            "integer" => value.is_i64() || value.is_u64(),
            other => return Err(format!("{path}: unknown schema type {other}")),
        };
        if !ok {
            return Err(format!("{path}: expected {ty}, got {value}"));
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            return Err(format!("{path}: {value} not in enum"));
        }
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        for key in required {
            let key = key.as_str().unwrap();
            if value.get(key).is_none() {
                return Err(format!("{path}: missing required key {key}"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        if let Some(obj) = value.as_object() {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    validate(sub, v, &format!("{path}.{key}"))?;
                }
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                validate(items, v, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}

fn assert_schema(schema_text: &str, value: &Value) {
    let schema: Value = serde_json::from_str(schema_text).unwrap();
    if let Err(e) = validate(&schema, value, "$") {
        panic!("schema violation: {e}\nvalue: {value:#}");
    }
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn sample_spectrum_distance_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    write(
        &model,
        r#"{"model":"sbm","n":30,"p":[0.5,0.3],"q":0.1,"s":[0.5,0.5],"seed":7}"#,
    );
    let g1 = dir.path().join("g1.txt");
    run_ok(bin().args(["sample", "--model"]).arg(&model).arg("--out").arg(&g1));
    // determinism: same seed, same bytes
    let g2 = dir.path().join("g2.txt");
    run_ok(bin().args(["sample", "--model"]).arg(&model).arg("--out").arg(&g2));
    assert_eq!(
        std::fs::read(&g1).unwrap(),
        std::fs::read(&g2).unwrap()
    );

    let out = run_ok(bin().args(["spectrum", "--graph"]).arg(&g1).args(["--c", "3"]));
    let spec: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(spec["values"].as_array().unwrap().len(), 3);

    let out = run_ok(bin()
        .args(["distance", "--a"])
        .arg(&g1)
        .arg("--b")
        .arg(&g2)
        .args(["--c", "2"]));
    let d: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(d["distance"].as_f64().unwrap(), 0.0);
}

#[test]
fn validation_failures_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    write(&bad, "3 1\n0 0\n");
    let out = bin()
        .args(["spectrum", "--graph"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let missing = dir.path().join("nope.json");
    let out = bin()
        .args(["estimate-communities", "--dataset"])
        .arg(&missing)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

fn small_manifest(dir: &Path, count: usize, n: usize) -> std::path::PathBuf {
    let items: Vec<String> = (0..count)
        .map(|i| {
            format!(
                r#"{{"model":{{"model":"sbm","n":{n},"p":[0.45,0.25],"q":0.08,"s":[0.5,0.5],"seed":{}}}}}"#,
                400 + i
            )
        })
        .collect();
    let path = dir.join("manifest.json");
    write(&path, &format!(r#"{{"items":[{}]}}"#, items.join(",")));
    path
}

#[test]
fn estimate_communities_schema() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_manifest(dir.path(), 6, 80);
    let out = run_ok(bin().args(["estimate-communities", "--dataset"]).arg(&manifest));
    let value: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_schema(include_str!("../schemas/estimate.schema.json"), &value);
    assert!(value["effective_c"].as_u64().unwrap() >= 1);
}

#[test]
fn frechet_mean_result_schema_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_manifest(dir.path(), 6, 70);
    let cfg = dir.path().join("fit.json");
    write(
        &cfg,
        r#"{"c_override":2,"max_iter":40,"rootfind":{"mc_moment_samples":10,"c0":0.9}}"#,
    );
    let result = dir.path().join("result.json");
    run_ok(bin()
        .args(["frechet-mean", "--dataset"])
        .arg(&manifest)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&result));
    let value: Value = serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    assert_schema(include_str!("../schemas/fit_result.schema.json"), &value);
    assert_eq!(value["c_star"].as_u64(), Some(2));
    let trace = dir.path().join("result.trace.csv");
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("iteration,objective,gradient_norm,step_accepted\n"));
    assert!(csv.lines().count() > 1);
}

#[test]
fn regress_schema_with_errors() {
    let dir = tempfile::tempdir().unwrap();
    let items: Vec<String> = (0..4)
        .map(|i| {
            let t = i as f64 / 3.0;
            format!(
                r#"{{"t":{t},"model":{{"model":"sbm","n":60,"p":[{},0.45],"q":0.08,"s":[0.5,0.5],"seed":{}}}}}"#,
                0.25 + 0.2 * t,
                500 + i
            )
        })
        .collect();
    let manifest = dir.path().join("timed.json");
    write(&manifest, &format!(r#"{{"items":[{}]}}"#, items.join(",")));
    let cfg = dir.path().join("fit.json");
    write(
        &cfg,
        r#"{"c_override":2,"max_iter":25,"rootfind":{"mc_moment_samples":8,"c0":0.9}}"#,
    );
    let out_path = dir.path().join("regress.json");
    run_ok(bin()
        .args(["regress", "--dataset"])
        .arg(&manifest)
        .args(["--times", "0.0,1.0", "--errors", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_path));
    let value: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_schema(include_str!("../schemas/regress.schema.json"), &value);
    assert_eq!(value["points"].as_array().unwrap().len(), 2);
    assert!(value["e"].as_f64().unwrap() >= 0.0);
    assert_eq!(value["e"], value["e_sbm"]);
}

#[test]
fn experiment_artifacts_and_byte_stable_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    for out in [&out1, &out2] {
        run_ok(bin()
            .args(["experiment", "--name", "exp1", "--n", "150", "--samples", "8"])
            .args(["--seed", "42"])
            .arg("--out")
            .arg(out));
    }
    for name in [
        "manifest.json",
        "estimate.json",
        "result.json",
        "objective_trace.csv",
        "histogram.csv",
        "observed_adjacency.csv",
        "fitted_adjacency.csv",
        "status.json",
    ] {
        assert!(out1.join(name).exists(), "missing {name}");
    }
    let status: Value =
        serde_json::from_str(&std::fs::read_to_string(out1.join("status.json")).unwrap()).unwrap();
    assert_schema(include_str!("../schemas/status.schema.json"), &status);
    assert_eq!(status["failed"].as_bool(), Some(false));
    for csv in ["objective_trace.csv", "histogram.csv", "observed_adjacency.csv", "fitted_adjacency.csv"] {
        assert_eq!(
            std::fs::read(out1.join(csv)).unwrap(),
            std::fs::read(out2.join(csv)).unwrap(),
            "{csv} differs between identical runs"
        );
    }
}
