//! Exact evaluation of `E(P)` for small standard RAPs by symbolic
//! conditioning on exponential variables.
//!
//! Each node reduces its state (line deletion), then either splits on which of
//! two incomparable non-covered combinations is smaller or conditions on the
//! minimum of the non-covered part, extracting `(k - |c|) / I(Y)` of expected
//! cost. Values of canonicalized states are memoized. The evaluator never
//! consults the cover formula.

mod canonical;
mod rules;
mod state;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use dashmap::DashMap;
use serde::Serialize;

pub use canonical::{canonical_key, CanonicalKey};
pub use rules::{
    classify_entries, condition_minimum, condition_pair, induction_measure, reduce_state, Branch,
    Classification, EntryKind, InductionMeasure, MinimumSplit, Reduced, Step,
};
pub use state::{ExpRapState, ExpVariable, LinearEntry, VarId};

use crate::error::{RapError, Result};
use crate::exec::Execution;
use crate::model::RapInstance;
use crate::rational::RationalValue;

/// Default recursion-node budget per evaluation.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_nodes: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_nodes: DEFAULT_NODE_BUDGET,
        }
    }
}

/// One line of the optional JSON-lines trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEvent {
    pub state_hash: String,
    pub rule: &'static str,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub weights: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extracted: Option<String>,
}

/// Result of one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub value: RationalValue,
    pub nodes: u64,
}

/// Symbolic evaluator with a memo table that persists across calls, so a
/// sweep over many instances shares work.
pub struct Oracle {
    limits: OracleLimits,
    exec: Execution,
    check_invariants: bool,
    memo: DashMap<CanonicalKey, RationalValue>,
    trace: Option<Mutex<Vec<TraceEvent>>>,
}

struct Run<'a> {
    oracle: &'a Oracle,
    nodes: AtomicU64,
}

impl Oracle {
    pub fn new(limits: OracleLimits) -> Self {
        Oracle {
            limits,
            exec: Execution::Sequential,
            check_invariants: false,
            memo: DashMap::new(),
            trace: None,
        }
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// Verify weight conservation, cost monotonicity and the induction
    /// measure at every node.
    pub fn with_invariant_checks(mut self, on: bool) -> Self {
        self.check_invariants = on;
        self
    }

    pub fn with_trace(mut self, on: bool) -> Self {
        self.trace = on.then(|| Mutex::new(Vec::new()));
        self
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn take_trace(&self) -> Vec<TraceEvent> {
        self.trace
            .as_ref()
            .map(|t| std::mem::take(&mut *t.lock().expect("trace lock")))
            .unwrap_or_default()
    }

    pub fn evaluate(&self, p: &RapInstance) -> Result<OracleOutcome> {
        self.evaluate_state(ExpRapState::from_instance(p))
    }

    /// `accumulated + E(remaining optimum)` of an arbitrary state.
    pub fn evaluate_state(&self, s: ExpRapState) -> Result<OracleOutcome> {
        let run = Run {
            oracle: self,
            nodes: AtomicU64::new(0),
        };
        let base = s.accumulated.clone();
        let mut s = s;
        s.normalize();
        let rest = run.value(s)?;
        Ok(OracleOutcome {
            value: base + rest,
            nodes: run.nodes.load(Ordering::Relaxed),
        })
    }

    fn record(&self, event: impl FnOnce() -> TraceEvent) {
        if let Some(t) = &self.trace {
            t.lock().expect("trace lock").push(event());
        }
    }
}

impl Run<'_> {
    /// Expected remaining cost, excluding `accumulated`.
    fn value(&self, s: ExpRapState) -> Result<RationalValue> {
        let count = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if count > self.oracle.limits.max_nodes {
            return Err(RapError::BudgetExhausted { nodes: count - 1 });
        }
        let base = s.accumulated.clone();
        let s = match reduce_state(s) {
            Reduced::Terminal(_) => return Ok(RationalValue::zero()),
            Reduced::Open(s) => s,
        };
        let key = canonical_key(&s);
        if let Some(v) = self.oracle.memo.get(&key) {
            return Ok(v.clone());
        }
        let cls = classify_entries(&s);
        let (rule, extracted, branches) = match cls.step() {
            rules::Step::Pair(u1, u2) => {
                let [a, b] = condition_pair(&s, u1, u2)?;
                ("pair", RationalValue::zero(), vec![a, b])
            }
            rules::Step::Minimum => {
                let split = condition_minimum(&s)?;
                ("minimum", split.extracted, split.children)
            }
        };
        if self.oracle.check_invariants {
            self.check_step(&s, &base, &extracted, &branches)?;
        }
        let child_values = self
            .oracle
            .exec
            .map_slice(&branches, |b| self.value(b.state.clone()));
        let mut total = extracted.clone();
        for (b, v) in branches.iter().zip(child_values) {
            total += &b.weight * &v?;
        }
        self.oracle.record(|| TraceEvent {
            state_hash: format!("{:016x}", key.fingerprint()),
            rule,
            k: s.k,
            m: s.m,
            n: s.n,
            weights: branches.iter().map(|b| b.weight.to_string()).collect(),
            extracted: (rule == "minimum").then(|| extracted.to_string()),
        });
        self.oracle.memo.insert(key, total.clone());
        Ok(total)
    }

    fn check_step(
        &self,
        parent: &ExpRapState,
        base: &RationalValue,
        extracted: &RationalValue,
        branches: &[Branch],
    ) -> Result<()> {
        let fail = |msg: String| Err(RapError::OracleInvariant(msg));
        let sum: RationalValue = branches.iter().map(|b| b.weight.clone()).sum();
        if sum != RationalValue::one()
            || branches
                .iter()
                .any(|b| b.weight.is_negative() || b.weight.is_zero())
        {
            return fail(format!("branch weights sum to {sum}"));
        }
        if extracted.is_negative() {
            return fail(format!("negative extracted cost {extracted}"));
        }
        let parent_measure = induction_measure(parent);
        for b in branches {
            if b.state.accumulated < *base || !b.state.is_consistent() {
                return fail("accumulated cost decreased or state inconsistent".into());
            }
            let child_measure = induction_measure(&b.state);
            if child_measure >= parent_measure {
                return fail(format!(
                    "induction measure did not decrease: {parent_measure:?} -> {child_measure:?}\n{parent}"
                ));
            }
        }
        Ok(())
    }
}

/// Exact `E(P)` with a fresh memo table.
pub fn oracle_expected_value(p: &RapInstance, limits: OracleLimits) -> Result<RationalValue> {
    Ok(Oracle::new(limits).evaluate(p)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> RationalValue {
        RationalValue::new(n, d)
    }

    fn eval(m: usize, n: usize, k: usize, zeros: &[(usize, usize)]) -> RationalValue {
        let p = RapInstance::with_zeros(m, n, k, zeros).unwrap();
        oracle_expected_value(&p, OracleLimits::default()).unwrap()
    }

    #[test]
    fn small_examples() {
        assert_eq!(eval(1, 1, 1, &[]), q(1, 1));
        assert_eq!(eval(2, 2, 2, &[]), q(5, 4));
        assert_eq!(eval(2, 2, 2, &[(0, 0)]), q(3, 4));
        assert_eq!(eval(1, 3, 1, &[]), q(1, 3));
        assert_eq!(eval(2, 2, 1, &[]), q(1, 4));
        assert_eq!(eval(2, 2, 2, &[(0, 0), (1, 1)]), q(0, 1));
    }

    #[test]
    fn three_by_three_examples() {
        assert_eq!(eval(3, 3, 3, &[]), q(49, 36));
        assert_eq!(eval(3, 3, 2, &[(0, 0)]), q(2, 9));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let p = RapInstance::no_zeros(3, 3, 3).unwrap();
        let err = oracle_expected_value(&p, OracleLimits { max_nodes: 5 }).unwrap_err();
        assert_eq!(err, RapError::BudgetExhausted { nodes: 5 });
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let p = RapInstance::with_zeros(3, 3, 3, &[(0, 1), (2, 2)]).unwrap();
        let a = Oracle::new(OracleLimits::default())
            .with_execution(Execution::Sequential)
            .evaluate(&p)
            .unwrap();
        let b = Oracle::new(OracleLimits::default())
            .with_execution(Execution::Parallel)
            .evaluate(&p)
            .unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn trace_records_rules() {
        let p = RapInstance::no_zeros(2, 2, 2).unwrap();
        let oracle = Oracle::new(OracleLimits::default()).with_trace(true);
        oracle.evaluate(&p).unwrap();
        let trace = oracle.take_trace();
        assert!(!trace.is_empty());
        assert!(trace.iter().any(|e| e.rule == "minimum"));
        let line = serde_json::to_string(&trace[0]).unwrap();
        assert!(line.contains("\"state_hash\""));
    }
}
