//! Seeded Monte Carlo estimation on sampled standard RAPs.
//!
//! Sample `i` draws from its own ChaCha8 stream (`seed`, stream `i`), so the
//! per-sample values do not depend on thread count or scheduling. Reductions
//! run sequentially over the index-ordered values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{RapError, Result};
use crate::exec::Execution;
use crate::formulas::{
    cover_formula_value_with, min_entry_usage_probability, row_inclusion_probability,
};
use crate::model::{Position, RapInstance, SampledMatrix, ZeroPattern};
use crate::rational::{RationalJson, RationalValue};
use crate::solver::{solve_k_assignment, SolveResult};

/// Generator for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Exp(1) variate by inversion, `U` uniform on `(0, 1]`.
pub fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    -u.ln()
}

/// Zeros exactly on the pattern, i.i.d. Exp(1) elsewhere.
pub fn sample_matrix<R: Rng + ?Sized>(p: &RapInstance, rng: &mut R) -> SampledMatrix {
    sample_pattern(p.pattern(), rng)
}

pub fn sample_pattern<R: Rng + ?Sized>(z: &ZeroPattern, rng: &mut R) -> SampledMatrix {
    let (m, n) = (z.rows(), z.cols());
    let mut entries = Vec::with_capacity(m * n);
    for r in 0..m {
        for c in 0..n {
            if z.is_zero(Position::new(r, c)) {
                entries.push(0.0);
            } else {
                // -ln(1) = 0 would break strict positivity; redraw.
                let mut v = exp1(rng);
                while v <= 0.0 {
                    v = exp1(rng);
                }
                entries.push(v);
            }
        }
    }
    SampledMatrix::new(z.clone(), entries).expect("sampled entries satisfy the pattern")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<RationalJson>,
}

impl EstimateReport {
    fn from_values(values: &[f64], seed: u64, target: Option<&RationalValue>) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        EstimateReport {
            mean,
            stderr: (var / n).sqrt(),
            samples: values.len() as u64,
            seed,
            target: target.map(RationalValue::to_json),
        }
    }

    pub fn target_value(&self) -> Option<RationalValue> {
        self.target.as_ref().and_then(|t| t.to_value().ok())
    }

    /// `|mean - target| <= sigmas * stderr` (exact when `stderr == 0`).
    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.stderr
    }

    /// `(mean - target) / stderr`; zero when both coincide exactly.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = self.mean - target;
        if diff == 0.0 {
            0.0
        } else {
            diff / self.stderr
        }
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < 2 {
        return Err(RapError::InvalidParameter("need at least 2 samples".into()));
    }
    Ok(())
}

/// One row of the optional per-sample CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub index: u64,
    pub cost: f64,
    pub used: Vec<Position>,
}

/// Solves `samples` independent realizations and applies `observe` to each.
pub fn simulate<T, F>(
    p: &RapInstance,
    samples: u64,
    seed: u64,
    exec: Execution,
    observe: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(&SampledMatrix, &SolveResult<f64>) -> T + Sync + Send,
{
    exec.map_range(samples as usize, |i| {
        let mut rng = sample_rng(seed, i as u64);
        let sample = sample_matrix(p, &mut rng);
        let solved =
            solve_k_assignment(&sample.to_cost_matrix(), p.k()).expect("instance k is valid");
        observe(&sample, &solved)
    })
}

pub fn sample_records(
    p: &RapInstance,
    samples: u64,
    seed: u64,
    exec: Execution,
) -> Vec<SampleRecord> {
    let mut out = simulate(p, samples, seed, exec, |_, s| SampleRecord {
        index: 0,
        cost: s.cost,
        used: s.assignment.positions().to_vec(),
    });
    for (i, r) in out.iter_mut().enumerate() {
        r.index = i as u64;
    }
    out
}

/// Monte Carlo estimate of `E(P)`, with the cover-formula value as target.
pub fn estimate_value(
    p: &RapInstance,
    samples: u64,
    seed: u64,
    exec: Execution,
) -> Result<EstimateReport> {
    check_samples(samples)?;
    let values = simulate(p, samples, seed, exec, |_, s| s.cost);
    let target = cover_formula_value_with(p, exec);
    Ok(EstimateReport::from_values(&values, seed, Some(&target)))
}

/// Frequency with which zero-free row `r` is used.
pub fn estimate_row_usage(
    p: &RapInstance,
    r: usize,
    samples: u64,
    seed: u64,
    exec: Execution,
) -> Result<EstimateReport> {
    check_samples(samples)?;
    let target = row_inclusion_probability(p, r)?;
    let values = simulate(p, samples, seed, exec, |_, s| {
        if s.assignment.uses_row(r) {
            1.0
        } else {
            0.0
        }
    });
    Ok(EstimateReport::from_values(&values, seed, Some(&target)))
}

/// Frequency with which nonzero position `pos` is in the optimum; target is
/// `E(P) - E(P')` with `P'` having a zero at `pos`.
pub fn estimate_entry_usage(
    p: &RapInstance,
    pos: Position,
    samples: u64,
    seed: u64,
    exec: Execution,
) -> Result<EstimateReport> {
    check_samples(samples)?;
    if pos.row >= p.m() || pos.col >= p.n() {
        return Err(RapError::PositionOutOfRange {
            row: pos.row,
            col: pos.col,
            m: p.m(),
            n: p.n(),
        });
    }
    if p.pattern().is_zero(pos) {
        return Err(RapError::ZeroPosition(pos));
    }
    let target =
        cover_formula_value_with(p, exec) - cover_formula_value_with(&p.insert_zero(pos)?, exec);
    let values = simulate(p, samples, seed, exec, |_, s| {
        if s.assignment.contains(pos) {
            1.0
        } else {
            0.0
        }
    });
    Ok(EstimateReport::from_values(&values, seed, Some(&target)))
}

/// Frequency with which the globally smallest entry of a zero-free `m x n`
/// matrix lies in the optimal k-assignment.
pub fn estimate_min_entry_usage(
    k: usize,
    m: usize,
    n: usize,
    samples: u64,
    seed: u64,
    exec: Execution,
) -> Result<EstimateReport> {
    check_samples(samples)?;
    let target = min_entry_usage_probability(k, m, n)?;
    let p = RapInstance::no_zeros(m, n, k)?;
    let values = simulate(&p, samples, seed, exec, |sample, s| {
        let (idx, _) = sample
            .entries()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("matrix is non-empty");
        let pos = Position::new(idx / n, idx % n);
        if s.assignment.contains(pos) {
            1.0
        } else {
            0.0
        }
    });
    Ok(EstimateReport::from_values(&values, seed, Some(&target)))
}
