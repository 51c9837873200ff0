//! Closed-form expectations and probabilities, evaluated exactly.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::cover::{cover_profile_with, row_excluded_profile};
use crate::error::{RapError, Result};
use crate::exec::Execution;
use crate::model::RapInstance;
use crate::rational::{binomial, RationalJson, RationalValue};

/// Which closed form produced a [`FormulaReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaMethod {
    Parisi,
    CoppersmithSorkin,
    GcdGroupSum,
    CoverFormula,
    RowInclusion,
    MinEntryUsage,
    TriangleIntegral,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaReport {
    pub method: FormulaMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub value: RationalJson,
}

impl FormulaReport {
    pub fn new(method: FormulaMethod, kmn: (usize, usize, usize), value: &RationalValue) -> Self {
        FormulaReport {
            method,
            k: Some(kmn.0),
            m: Some(kmn.1),
            n: Some(kmn.2),
            value: value.to_json(),
        }
    }
}

fn check_kmn(k: usize, m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(RapError::EmptyDimension { m, n });
    }
    let max = m.min(n);
    if k == 0 || k > max {
        return Err(RapError::InvalidK { k, max });
    }
    Ok(())
}

fn unit_over(d: u64) -> RationalValue {
    RationalValue::new(1, d)
}

/// `sum 1/d` over a common denominator, reduced once at the end.
fn unit_fraction_sum(dens: impl Iterator<Item = u64> + Clone) -> RationalValue {
    let mut lcm = BigUint::one();
    for d in dens.clone() {
        let r = (&lcm % d).to_u64().expect("remainder fits");
        lcm *= d / d.gcd(&r);
    }
    let mut num = BigUint::zero();
    for d in dens {
        num += &lcm / d;
    }
    RationalValue::new(BigInt::from(num), BigInt::from(lcm))
}

/// `1 + 1/4 + ... + 1/k^2`.
pub fn parisi_value(k: usize) -> Result<RationalValue> {
    if k < 1 {
        return Err(RapError::InvalidParameter("k must be at least 1".into()));
    }
    Ok(unit_fraction_sum((1..=k as u64).map(|d| d * d)))
}

/// `sum_{i+j<k} 1/((m-i)(n-j))`.
pub fn cs_value(k: usize, m: usize, n: usize) -> Result<RationalValue> {
    check_kmn(k, m, n)?;
    Ok(unit_fraction_sum((0..k).flat_map(move |i| {
        (0..k - i).map(move |j| ((m - i) * (n - j)) as u64)
    })))
}

/// Sum of the `k = m = n` Coppersmith–Sorkin terms with `gcd(k-i, k-j) = d`;
/// always `1/d^2`.
pub fn gcd_group_sum(k: usize, d: usize) -> Result<RationalValue> {
    if k == 0 || d == 0 || d > k {
        return Err(RapError::InvalidParameter(format!(
            "need 1 <= d <= k, got d = {d}, k = {k}"
        )));
    }
    let mut acc = RationalValue::zero();
    for i in 0..k {
        for j in 0..k - i {
            let (a, b) = (k - i, k - j);
            if a.gcd(&b) == d {
                acc += unit_over((a * b) as u64);
            }
        }
    }
    Ok(acc)
}

/// Expected optimal k-assignment of a standard RAP via the cover formula.
pub fn cover_formula_value(p: &RapInstance) -> RationalValue {
    cover_formula_value_with(p, Execution::default())
}

pub fn cover_formula_value_with(p: &RapInstance, exec: Execution) -> RationalValue {
    let (m, n) = (p.m() as u64, p.n() as u64);
    let profile = cover_profile_with(p, exec);
    let mut acc = RationalValue::zero();
    for (i, j, d) in profile.entries() {
        if d == 0 {
            continue;
        }
        let den = binomial(m - 1, i as u64) * binomial(n - 1, j as u64);
        acc += RationalValue::new(d, den);
    }
    acc / RationalValue::from(m * n)
}

/// Probability that the zero-free row `r` is used by the optimal k-assignment.
pub fn row_inclusion_probability(p: &RapInstance, r: usize) -> Result<RationalValue> {
    if r >= p.m() {
        return Err(RapError::IndexOutOfRange {
            index: r,
            limit: p.m(),
        });
    }
    if p.pattern().row_has_zero(r) {
        return Err(RapError::RowHasZero(r));
    }
    let m = p.m() as u64;
    let dbar = row_excluded_profile(p, r)?;
    let sum: RationalValue = dbar
        .into_iter()
        .enumerate()
        .filter(|&(_, d)| d > 0)
        .map(|(i, d)| RationalValue::new(d, binomial(m - 1, i as u64)))
        .sum();
    Ok(sum / RationalValue::from(m))
}

/// Probability that the smallest entry of a zero-free `m x n` matrix is in the
/// optimal k-assignment: `1 - k(k-1)/(2mn)`.
pub fn min_entry_usage_probability(k: usize, m: usize, n: usize) -> Result<RationalValue> {
    check_kmn(k, m, n)?;
    Ok(RationalValue::one() - RationalValue::new((k * (k - 1)) as u64, (2 * m * n) as u64))
}

/// `∫_Δ dx dy / ((alpha - x)(beta - y))` over the unit right triangle.
///
/// The inner integral is `ln(beta / (beta - 1 + x))`; the outer one is done by
/// tanh-sinh quadrature, which copes with the logarithmic endpoint singularity
/// at `alpha = beta = 1`.
pub fn triangle_integral(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha >= 1.0 && beta >= 1.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(RapError::InvalidParameter(format!(
            "alpha and beta must be finite and >= 1, got {alpha}, {beta}"
        )));
    }
    // f(x) with both x and u = 1 - x supplied accurately.
    let f = |x: f64, u: f64| -> f64 {
        let inner = if u < 0.5 {
            -(-u / beta).ln_1p()
        } else {
            beta.ln() - ((beta - 1.0) + x).ln()
        };
        inner / ((alpha - 1.0) + u)
    };
    Ok(tanh_sinh_unit(f, 1e-13))
}

/// Tanh-sinh quadrature on `[0, 1]`. The integrand receives `(x, 1 - x)`.
fn tanh_sinh_unit(f: impl Fn(f64, f64) -> f64, tol: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let node = |t: f64| -> Option<(f64, f64, f64)> {
        let s = half_pi * t.sinh();
        // x = 1/(1+e^{-2s}), 1-x = 1/(1+e^{2s})
        let x = 1.0 / (1.0 + (-2.0 * s).exp());
        let u = 1.0 / (1.0 + (2.0 * s).exp());
        let w = 2.0 * half_pi * t.cosh() * x * u;
        if x <= 0.0 || u <= 0.0 || !w.is_finite() || w == 0.0 {
            None
        } else {
            Some((x, u, w))
        }
    };
    let t_max = 6.5;
    let mut h = 0.5;
    let mut sum = {
        let (x, u, w) = node(0.0).expect("centre node");
        f(x, u) * w
    };
    let mut t = h;
    while t <= t_max {
        for tt in [t, -t] {
            if let Some((x, u, w)) = node(tt) {
                sum += f(x, u) * w;
            }
        }
        t += h;
    }
    let mut estimate = sum * h;
    for _ in 0..12 {
        h /= 2.0;
        let mut t = h;
        while t <= t_max {
            for tt in [t, -t] {
                if let Some((x, u, w)) = node(tt) {
                    sum += f(x, u) * w;
                }
            }
            t += 2.0 * h;
        }
        let next = sum * h;
        let done = (next - estimate).abs() <= tol * next.abs().max(1.0);
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}
