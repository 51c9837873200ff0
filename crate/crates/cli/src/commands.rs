use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::ValueEnum;
use rap_core::cover::cover_profile_with;
use rap_core::formulas::{
    cover_formula_value_with, cs_value, min_entry_usage_probability, parisi_value,
    row_inclusion_probability, triangle_integral,
};
use rap_core::model::Position;
use rap_core::montecarlo::{
    estimate_entry_usage, estimate_min_entry_usage, estimate_row_usage, estimate_value,
    sample_records, EstimateReport,
};
use rap_core::oracle::{Oracle, OracleLimits};
use rap_core::{parse_instance, Execution, RapError, RapInstance, RationalValue};
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_MISMATCH: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

const SIGMAS: f64 = 3.0;

#[derive(Debug, Serialize)]
pub struct CommandResult {
    pub command: &'static str,
    pub inputs: Value,
    pub outputs: Value,
    pub elapsed_ms: f64,
}

pub struct Outcome {
    pub result: CommandResult,
    pub status: u8,
}

struct Timer(Instant);

impl Timer {
    fn start() -> Self {
        Timer(Instant::now())
    }

    fn finish(self, command: &'static str, inputs: Value, outputs: Value, status: u8) -> Outcome {
        Outcome {
            result: CommandResult {
                command,
                inputs,
                outputs,
                elapsed_ms: self.0.elapsed().as_secs_f64() * 1e3,
            },
            status,
        }
    }
}

pub fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<RapError>() {
        Some(RapError::BudgetExhausted { .. }) => EXIT_BUDGET,
        _ => EXIT_USAGE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Oracle,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimulateTarget {
    Value,
    Row(usize),
    Entry(Position),
    MinEntry,
}

impl FromStr for SimulateTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected value, row:R, entry:R,C or min-entry, got {s:?}");
        match s {
            "value" => return Ok(SimulateTarget::Value),
            "min-entry" => return Ok(SimulateTarget::MinEntry),
            _ => {}
        }
        if let Some(r) = s.strip_prefix("row:") {
            return r.parse().map(SimulateTarget::Row).map_err(|_| bad());
        }
        if let Some(rc) = s.strip_prefix("entry:") {
            let (r, c) = rc.split_once(',').ok_or_else(bad)?;
            let (r, c) = (r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?);
            return Ok(SimulateTarget::Entry(Position::new(r, c)));
        }
        Err(bad())
    }
}

impl SimulateTarget {
    fn label(&self) -> String {
        match self {
            SimulateTarget::Value => "value".into(),
            SimulateTarget::Row(r) => format!("row:{r}"),
            SimulateTarget::Entry(p) => format!("entry:{},{}", p.row, p.col),
            SimulateTarget::MinEntry => "min-entry".into(),
        }
    }
}

fn read_instance(path: &Path) -> anyhow::Result<RapInstance> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn instance_inputs(path: &Path, p: &RapInstance) -> Value {
    json!({
        "instance": path.display().to_string(),
        "m": p.m(),
        "n": p.n(),
        "k": p.k(),
        "zeros": p.to_document().zeros,
    })
}

fn rational(v: &RationalValue) -> Value {
    serde_json::to_value(v.to_json()).expect("rationals serialize")
}

fn estimate(r: &EstimateReport) -> Value {
    let mut out = serde_json::to_value(r).expect("reports serialize");
    if let Some(target) = r.target_value() {
        let t = target.to_f64();
        out["z"] = json!(r.z_score(t));
        out["within_3_sigma"] = json!(r.within(t, SIGMAS));
    }
    out
}

pub fn value(path: &Path, exec: Execution) -> anyhow::Result<Outcome> {
    let timer = Timer::start();
    let p = read_instance(path)?;
    let v = cover_formula_value_with(&p, exec);
    let outputs = json!({ "value": rational(&v) });
    Ok(timer.finish("value", instance_inputs(path, &p), outputs, EXIT_OK))
}

pub fn profile(path: &Path, exec: Execution) -> anyhow::Result<Outcome> {
    let timer = Timer::start();
    let p = read_instance(path)?;
    let prof = cover_profile_with(&p, exec);
    let outputs = serde_json::to_value(prof.to_json())?;
    Ok(timer.finish("profile", instance_inputs(path, &p), outputs, EXIT_OK))
}

fn budget_report(nodes: u64) -> Value {
    json!({ "status": "budget_exhausted", "nodes": nodes })
}

pub fn verify(
    path: &Path,
    checks: &[CheckKind],
    budget: u64,
    samples: u64,
    seed: Option<u64>,
    exec: Execution,
) -> anyhow::Result<Outcome> {
    let timer = Timer::start();
    let p = read_instance(path)?;
    let run_mc = checks.contains(&CheckKind::Mc);
    let seed = match (run_mc, seed) {
        (true, None) => bail!("the mc check needs --seed"),
        (_, s) => s,
    };
    let formula = cover_formula_value_with(&p, exec);
    let mut outputs = json!({ "formula": rational(&formula) });
    let mut status = EXIT_OK;
    let mut agree = true;

    if checks.contains(&CheckKind::Oracle) {
        let oracle = Oracle::new(OracleLimits { max_nodes: budget }).with_execution(exec);
        match oracle.evaluate(&p) {
            Ok(out) => {
                let delta = out.value.clone() - formula.clone();
                let same = delta.is_zero();
                agree &= same;
                outputs["oracle"] = json!({
                    "status": "ok",
                    "value": rational(&out.value),
                    "nodes": out.nodes,
                    "agree": same,
                    "delta": rational(&delta),
                });
            }
            Err(RapError::BudgetExhausted { nodes }) => {
                outputs["oracle"] = budget_report(nodes);
                status = EXIT_BUDGET;
            }
            Err(e) => return Err(e.into()),
        }
    }
    if run_mc {
        let r = estimate_value(&p, samples, seed.expect("checked above"), exec)?;
        outputs["monte_carlo"] = estimate(&r);
    }
    outputs["agree"] = json!(agree);
    if !agree {
        status = EXIT_MISMATCH;
    }
    let mut inputs = instance_inputs(path, &p);
    inputs["checks"] = json!(checks
        .iter()
        .map(|c| match c {
            CheckKind::Oracle => "oracle",
            CheckKind::Mc => "mc",
        })
        .collect::<Vec<_>>());
    inputs["budget"] = json!(budget);
    if run_mc {
        inputs["samples"] = json!(samples);
        inputs["seed"] = json!(seed);
    }
    Ok(timer.finish("verify", inputs, outputs, status))
}

pub fn parisi(k: usize) -> anyhow::Result<Outcome> {
    let timer = Timer::start();
    let v = parisi_value(k)?;
    Ok(timer.finish(
        "parisi",
        json!({ "k": k }),
        json!({ "value": rational(&v) }),
        EXIT_OK,
    ))
}

pub fn cs(k: usize, m: usize, n: usize) -> anyhow::Result<Outcome> {
    let timer = Timer::start();
    let v = cs_value(k, m, n)?;
    let inputs = json!({ "k": k, "m": m, "n": n });
    Ok(timer.finish("cs", inputs, json!({ "value": rational(&v) }), EXIT_OK))
}

pub fn rowprob(path: &Path, row: usize) -> anyhow::Result<Outcome> {
    let timer = Timer::start();
    let p = read_instance(path)?;
    let v = row_inclusion_probability(&p, row)?;
    let mut inputs = instance_inputs(path, &p);
    inputs["row"] = json!(row);
    Ok(timer.finish(
        "rowprob",
        inputs,
        json!({ "probability": rational(&v) }),
        EXIT_OK,
    ))
}

pub fn minprob(k: usize, m: usize, n: usize) -> anyhow::Result<Outcome> {
    let timer = Timer::start();
    let v = min_entry_usage_probability(k, m, n)?;
    let inputs = json!({ "k": k, "m": m, "n": n });
    Ok(timer.finish(
        "minprob",
        inputs,
        json!({ "probability": rational(&v) }),
        EXIT_OK,
    ))
}

fn write_csv(
    path: &Path,
    p: &RapInstance,
    samples: u64,
    seed: u64,
    exec: Execution,
) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["index", "cost", "used"])?;
    for rec in sample_records(p, samples, seed, exec) {
        let used = rec
            .used
            .iter()
            .map(|q| format!("{}:{}", q.row, q.col))
            .collect::<Vec<_>>()
            .join(" ");
        w.write_record([rec.index.to_string(), format!("{:.17e}", rec.cost), used])?;
    }
    w.into_inner().map_err(|e| e.into_error())?.flush()?;
    Ok(())
}

pub fn simulate(
    path: &Path,
    samples: u64,
    seed: u64,
    what: &SimulateTarget,
    csv: Option<&Path>,
    exec: Execution,
) -> anyhow::Result<Outcome> {
    let timer = Timer::start();
    let p = read_instance(path)?;
    let report = match what {
        SimulateTarget::Value => estimate_value(&p, samples, seed, exec)?,
        SimulateTarget::Row(r) => estimate_row_usage(&p, *r, samples, seed, exec)?,
        SimulateTarget::Entry(q) => estimate_entry_usage(&p, *q, samples, seed, exec)?,
        SimulateTarget::MinEntry => {
            if !p.zeros().is_empty() {
                bail!("min-entry simulation needs an instance without zeros");
            }
            estimate_min_entry_usage(p.k(), p.m(), p.n(), samples, seed, exec)?
        }
    };
    if let Some(csv) = csv {
        write_csv(csv, &p, samples, seed, exec)?;
    }
    let mut inputs = instance_inputs(path, &p);
    inputs["samples"] = json!(samples);
    inputs["seed"] = json!(seed);
    inputs["what"] = json!(what.label());
    if let Some(csv) = csv {
        inputs["csv"] = json!(csv.display().to_string());
    }
    Ok(timer.finish("simulate", inputs, estimate(&report), EXIT_OK))
}

pub fn oracle(
    path: &Path,
    budget: u64,
    trace: Option<&Path>,
    exec: Execution,
) -> anyhow::Result<Outcome> {
    let timer = Timer::start();
    let p = read_instance(path)?;
    // a trace is only reproducible line-for-line when branches run in order
    let exec = if trace.is_some() {
        Execution::Sequential
    } else {
        exec
    };
    let oracle = Oracle::new(OracleLimits { max_nodes: budget })
        .with_execution(exec)
        .with_trace(trace.is_some());
    let (outputs, status) = match oracle.evaluate(&p) {
        Ok(out) => (
            json!({ "status": "ok", "value": rational(&out.value), "nodes": out.nodes }),
            EXIT_OK,
        ),
        Err(RapError::BudgetExhausted { nodes }) => (budget_report(nodes), EXIT_BUDGET),
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = trace {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        for event in oracle.take_trace() {
            serde_json::to_writer(&mut w, &event)?;
            writeln!(w)?;
        }
        w.flush()?;
    }
    let mut inputs = instance_inputs(path, &p);
    inputs["budget"] = json!(budget);
    if let Some(t) = trace {
        inputs["trace"] = json!(t.display().to_string());
    }
    Ok(timer.finish("oracle", inputs, outputs, status))
}

pub fn integral(alpha: f64, beta: f64) -> anyhow::Result<Outcome> {
    let timer = Timer::start();
    let v = triangle_integral(alpha, beta)?;
    let inputs = json!({ "alpha": alpha, "beta": beta });
    Ok(timer.finish("integral", inputs, json!({ "value": v }), EXIT_OK))
}
