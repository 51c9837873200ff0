use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn rap() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rap"));
    cmd.env_remove("RAP_THREADS");
    cmd
}

fn write_instance(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> (Output, Option<Value>) {
    let out = rap().args(args).output().unwrap();
    let json = serde_json::from_slice(&out.stdout).ok();
    (out, json)
}

fn ok(args: &[&str]) -> Value {
    let (out, json) = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    json.expect("stdout is JSON")
}

fn fraction(v: &Value) -> String {
    format!(
        "{}/{}",
        v["num"].as_str().unwrap(),
        v["den"].as_str().unwrap()
    )
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn schema_check(result: &Value) {
    let name = result["command"].as_str().unwrap();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("schemas/{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator
        .iter_errors(result)
        .map(|e| e.to_string())
        .collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("elapsed_ms");
    v
}

#[test]
fn value_examples() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (r#"{"m":3,"n":3,"k":3,"zeros":[]}"#, "49/36"),
        (
            r#"{"m":2,"n":2,"k":2,"zeros":[[0,0],[0,1],[1,0],[1,1]]}"#,
            "0/1",
        ),
        (r#"{"m":3,"n":3,"k":2,"zeros":[[0,0]]}"#, "2/9"),
    ];
    for (i, (text, expected)) in cases.iter().enumerate() {
        let path = write_instance(&dir, &format!("v{i}.json"), text);
        let out = ok(&["value", p(&path)]);
        assert_eq!(fraction(&out["outputs"]["value"]), *expected);
        schema_check(&out);
    }
}

#[test]
fn profile_examples() {
    let dir = TempDir::new().unwrap();
    let entries = |text: &str| -> Vec<(u64, u64, String)> {
        let path = write_instance(&dir, "p.json", text);
        let out = ok(&["profile", p(&path)]);
        schema_check(&out);
        out["outputs"]["d"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| {
                (
                    e[0].as_u64().unwrap(),
                    e[1].as_u64().unwrap(),
                    e[2].as_str().unwrap().to_string(),
                )
            })
            .collect()
    };
    let d = entries(r#"{"m":2,"n":2,"k":2,"zeros":[]}"#);
    assert!(d.contains(&(0, 0, "1".into())));
    assert!(d.contains(&(1, 0, "2".into())));
    assert!(d.contains(&(0, 1, "2".into())));
    let d = entries(r#"{"m":2,"n":2,"k":2,"zeros":[[0,0],[1,1]]}"#);
    assert!(d.iter().all(|e| e.2 == "0"));
    let d = entries(r#"{"m":3,"n":3,"k":2,"zeros":[[0,0]]}"#);
    let nonzero: Vec<_> = d.iter().filter(|e| e.2 != "0").collect();
    assert_eq!(nonzero.len(), 3);
    assert!(nonzero.iter().all(|e| e.2 == "1"));
}

#[test]
fn verify_agrees_and_reports_budget_exhaustion() {
    let dir = TempDir::new().unwrap();
    let small = write_instance(&dir, "s.json", r#"{"m":2,"n":2,"k":2,"zeros":[[0,0]]}"#);
    let out = ok(&["verify", p(&small)]);
    assert_eq!(out["outputs"]["agree"], true);
    assert_eq!(fraction(&out["outputs"]["formula"]), "3/4");
    assert_eq!(fraction(&out["outputs"]["oracle"]["value"]), "3/4");
    schema_check(&out);

    let big = write_instance(
        &dir,
        "b.json",
        r#"{"m":5,"n":5,"k":4,"zeros":[[0,0],[1,2]]}"#,
    );
    let (res, json) = run(&["verify", p(&big), "--budget", "10"]);
    assert_eq!(res.status.code(), Some(3));
    let json = json.unwrap();
    assert_eq!(json["outputs"]["oracle"]["status"], "budget_exhausted");
    schema_check(&json);
    let (res, json) = run(&["oracle", p(&big), "--budget", "10"]);
    assert_eq!(res.status.code(), Some(3));
    schema_check(&json.unwrap());
}

#[test]
fn verify_with_monte_carlo() {
    let dir = TempDir::new().unwrap();
    let path = write_instance(&dir, "m.json", r#"{"m":3,"n":3,"k":2,"zeros":[[0,0]]}"#);
    let (res, _) = run(&["verify", p(&path), "--checks", "oracle,mc"]);
    assert_eq!(res.status.code(), Some(1), "mc needs a seed");
    let out = ok(&[
        "verify",
        p(&path),
        "--checks",
        "oracle,mc",
        "--seed",
        "5",
        "--samples",
        "20000",
    ]);
    assert_eq!(out["outputs"]["monte_carlo"]["samples"], 20000);
    assert!(out["outputs"]["monte_carlo"]["z"].is_number());
    schema_check(&out);
}

#[test]
fn thin_wrappers() {
    let out = ok(&["parisi", "3"]);
    assert_eq!(fraction(&out["outputs"]["value"]), "49/36");
    schema_check(&out);
    let out = ok(&["cs", "2", "2", "2"]);
    assert_eq!(fraction(&out["outputs"]["value"]), "5/4");
    schema_check(&out);
    let out = ok(&["minprob", "3", "3", "3"]);
    assert_eq!(fraction(&out["outputs"]["probability"]), "2/3");
    schema_check(&out);
    let out = ok(&["integral", "1", "2"]);
    let expected = std::f64::consts::PI.powi(2) / 12.0 - std::f64::consts::LN_2.powi(2) / 2.0;
    assert!((out["outputs"]["value"].as_f64().unwrap() - expected).abs() < 1e-9);
    schema_check(&out);

    let dir = TempDir::new().unwrap();
    let path = write_instance(&dir, "r.json", r#"{"m":3,"n":3,"k":2,"zeros":[[0,0]]}"#);
    let out = ok(&["rowprob", p(&path), "2"]);
    assert_eq!(fraction(&out["outputs"]["probability"]), "1/2");
    schema_check(&out);
    let (res, _) = run(&["rowprob", p(&path), "0"]);
    assert_eq!(res.status.code(), Some(1), "row 0 holds a zero");
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let path = write_instance(
        &dir,
        "t.json",
        r#"{"m":3,"n":4,"k":3,"zeros":[[0,1],[2,3]]}"#,
    );
    let args = ["simulate", p(&path), "--samples", "3000", "--seed", "42"];
    let full = ok(&[&["--threads", "1"], &args[..]].concat());
    schema_check(&full);
    let one = without_timing(full);
    let four = without_timing(ok(&[&["--threads", "4"], &args[..]].concat()));
    assert_eq!(one, four);
    let env = rap().args(args).env("RAP_THREADS", "3").output().unwrap();
    assert!(env.status.success());
    let env: Value = serde_json::from_slice(&env.stdout).unwrap();
    assert_eq!(without_timing(env), one);
    for what in ["row:1", "entry:1,1", "value"] {
        let out = ok(&[
            "simulate",
            p(&path),
            "--samples",
            "500",
            "--seed",
            "1",
            "--what",
            what,
        ]);
        assert_eq!(out["inputs"]["what"], what);
        schema_check(&out);
    }
}

#[test]
fn simulate_requires_a_seed_and_valid_target() {
    let dir = TempDir::new().unwrap();
    let path = write_instance(&dir, "s.json", r#"{"m":2,"n":2,"k":1,"zeros":[]}"#);
    let (res, _) = run(&["simulate", p(&path), "--samples", "10"]);
    assert_eq!(res.status.code(), Some(1));
    let (res, _) = run(&[
        "simulate",
        p(&path),
        "--samples",
        "10",
        "--seed",
        "1",
        "--what",
        "col:1",
    ]);
    assert_eq!(res.status.code(), Some(1));
    let out = ok(&[
        "simulate",
        p(&path),
        "--samples",
        "10",
        "--seed",
        "1",
        "--what",
        "min-entry",
    ]);
    schema_check(&out);
    let zeros = write_instance(&dir, "z.json", r#"{"m":2,"n":2,"k":1,"zeros":[[0,0]]}"#);
    let (res, _) = run(&[
        "simulate",
        p(&zeros),
        "--samples",
        "10",
        "--seed",
        "1",
        "--what",
        "min-entry",
    ]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn per_sample_csv() {
    let dir = TempDir::new().unwrap();
    let path = write_instance(&dir, "c.json", r#"{"m":3,"n":3,"k":2,"zeros":[[0,0]]}"#);
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    ok(&[
        "simulate",
        p(&path),
        "--samples",
        "200",
        "--seed",
        "9",
        "--csv",
        p(&csv_a),
    ]);
    ok(&[
        "--threads",
        "1",
        "simulate",
        p(&path),
        "--samples",
        "200",
        "--seed",
        "9",
        "--csv",
        p(&csv_b),
    ]);
    let a = std::fs::read_to_string(&csv_a).unwrap();
    assert_eq!(a, std::fs::read_to_string(&csv_b).unwrap());
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines.len(), 201);
    assert_eq!(lines[0], "index,cost,used");
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 3);
        assert!(fields[1].parse::<f64>().unwrap() >= 0.0);
        assert_eq!(fields[2].split(' ').count(), 2);
    }
}

#[test]
fn oracle_trace_is_json_lines() {
    let dir = TempDir::new().unwrap();
    let path = write_instance(
        &dir,
        "o.json",
        r#"{"m":3,"n":3,"k":3,"zeros":[[0,0],[1,2]]}"#,
    );
    let trace = dir.path().join("trace.jsonl");
    let out = ok(&["oracle", p(&path), "--trace", p(&trace)]);
    schema_check(&out);
    let value = ok(&["value", p(&path)]);
    assert_eq!(out["outputs"]["value"], value["outputs"]["value"]);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(!text.is_empty());
    for line in text.lines() {
        let event: Value = serde_json::from_str(line).unwrap();
        assert!(event["rule"].is_string());
        assert!(event["weights"].is_array());
    }
    let again = dir.path().join("again.jsonl");
    ok(&["--threads", "4", "oracle", p(&path), "--trace", p(&again)]);
    assert_eq!(text, std::fs::read_to_string(&again).unwrap());
}

#[test]
fn malformed_input_exits_with_usage_status() {
    let dir = TempDir::new().unwrap();
    for (i, text) in [
        "not json",
        r#"{"m":2,"n":2,"k":3,"zeros":[]}"#,
        r#"{"m":2,"n":2,"k":1,"zeros":[[5,0]]}"#,
    ]
    .iter()
    .enumerate()
    {
        let path = write_instance(&dir, &format!("bad{i}.json"), text);
        let (res, _) = run(&["value", p(&path)]);
        assert_eq!(res.status.code(), Some(1), "{text}");
        assert!(String::from_utf8_lossy(&res.stderr).contains("error"));
    }
    let (res, _) = run(&["value", "/nonexistent/instance.json"]);
    assert_eq!(res.status.code(), Some(1));
    let (res, _) = run(&["no-such-command"]);
    assert_eq!(res.status.code(), Some(1));
    let (res, _) = run(&["--threads", "0", "parisi", "2"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn reads_stdin_and_prints_tables() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = rap()
        .args(["--pretty", "value", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"{"m":2,"n":2,"k":2,"zeros":[[0,0]]}"#)
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("command  value"));
    assert!(text.contains("3/4"));

    let dir = TempDir::new().unwrap();
    let path = write_instance(&dir, "g.json", r#"{"m":2,"n":2,"k":2,"zeros":[]}"#);
    let out = rap()
        .args(["--pretty", "profile", p(&path)])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("d[i][j]"));
}
