//! Plain-text tables for `--pretty`.

use std::fmt::Write;

use serde_json::Value;

use crate::commands::CommandResult;

fn is_rational(v: &Value) -> bool {
    v.get("num").is_some() && v.get("den").is_some() && v.get("approx").is_some()
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        _ if is_rational(v) => {
            let (num, den) = (
                v["num"].as_str().unwrap_or("?"),
                v["den"].as_str().unwrap_or("?"),
            );
            let exact = if den == "1" {
                num.to_string()
            } else {
                format!("{num}/{den}")
            };
            format!("{exact}  (~{})", v["approx"].as_str().unwrap_or("?"))
        }
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) if !is_rational(v) => {
            for (k, inner) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, inner, rows);
            }
        }
        _ => rows.push((prefix.to_string(), scalar(v))),
    }
}

fn key_values(out: &mut String, title: &str, v: &Value) {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    if rows.is_empty() {
        return;
    }
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let _ = writeln!(out, "{title}");
    for (k, val) in rows {
        let _ = writeln!(out, "  {k:<width$}  {val}");
    }
}

/// `d_{i,j}` as a grid with rows `i` and columns `j`.
fn profile_grid(out: &mut String, v: &Value) {
    let k = v["k"].as_u64().unwrap_or(0) as usize;
    let mut grid = vec![vec![String::new(); k]; k];
    for entry in v["d"].as_array().into_iter().flatten() {
        let (i, j) = (
            entry[0].as_u64().unwrap_or(0) as usize,
            entry[1].as_u64().unwrap_or(0) as usize,
        );
        if i < k && j < k {
            grid[i][j] = entry[2].as_str().unwrap_or("").to_string();
        }
    }
    let width = grid
        .iter()
        .flatten()
        .map(String::len)
        .max()
        .unwrap_or(1)
        .max(3);
    let _ = writeln!(out, "outputs (d[i][j], k = {k})");
    let _ = write!(out, "  {:>4}", "i\\j");
    for j in 0..k {
        let _ = write!(out, "  {j:>width$}");
    }
    let _ = writeln!(out);
    for (i, row) in grid.iter().enumerate() {
        let _ = write!(out, "  {i:>4}");
        for cell in row {
            let _ = write!(out, "  {cell:>width$}");
        }
        let _ = writeln!(out);
    }
}

pub fn table(r: &CommandResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command  {}", r.command);
    key_values(&mut out, "inputs", &r.inputs);
    if r.command == "profile" {
        profile_grid(&mut out, &r.outputs);
    } else {
        key_values(&mut out, "outputs", &r.outputs);
    }
    let _ = write!(out, "elapsed  {:.3} ms", r.elapsed_ms);
    out
}
