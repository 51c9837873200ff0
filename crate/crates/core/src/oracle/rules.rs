//! Conditioning rules on symbolic states: line deletion, splitting on which of
//! two incomparable combinations is smaller, and conditioning on the minimum
//! of the non-covered part.

use crate::cover::{
    bipartite_matching, column_in_every_cover, row_in_every_cover, row_maximal_cover, LineCover,
};
use crate::error::{RapError, Result};
use crate::model::Position;
use crate::rational::RationalValue;

use super::state::{ExpRapState, VarId};

/// Outcome of [`reduce_state`].
#[derive(Debug, Clone, PartialEq)]
pub enum Reduced {
    /// `k` independent zeros exist; the branch is worth `accumulated`.
    Terminal(RationalValue),
    Open(ExpRapState),
}

/// Deletes lines lying in every (k-1)-cover of the zeros until none is left,
/// and closes the branch once `k` independent zeros exist.
pub fn reduce_state(mut s: ExpRapState) -> Reduced {
    loop {
        if s.k == 0 {
            return Reduced::Terminal(s.accumulated);
        }
        let z = s.zero_pattern();
        if bipartite_matching(&z.adjacency(), z.cols()).size >= s.k {
            return Reduced::Terminal(s.accumulated);
        }
        if let Some(c) = (0..s.n).find(|&c| column_in_every_cover(&z, s.k, c)) {
            s.delete_column(c);
            continue;
        }
        if let Some(r) = (0..s.m).find(|&r| row_in_every_cover(&z, s.k, r)) {
            s.delete_row(r);
            continue;
        }
        return Reduced::Open(s);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Zero,
    Standard,
    Nonstandard,
}

/// Bookkeeping used to pick the next conditioning step.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Row-major entry kinds.
    pub kinds: Vec<EntryKind>,
    /// Row-maximal optimal cover of the zeros.
    pub cover: LineCover,
    pub independent_zeros: usize,
    /// Non-covered nonstandard positions, lexicographic.
    pub noncovered_nonstandard: Vec<Position>,
    /// Those not strictly dominated by another non-covered nonstandard entry.
    pub potentially_minimal: Vec<Position>,
    /// Lexicographically first entry that is `<=` every other non-covered
    /// nonstandard entry.
    pub minimum: Option<Position>,
    /// Incomparable pairs among the potentially minimal entries, lexicographic.
    pub incomparable_pairs: Vec<(Position, Position)>,
}

impl Classification {
    pub fn kind(&self, n: usize, p: Position) -> EntryKind {
        self.kinds[p.row * n + p.col]
    }

    pub fn step(&self) -> Step {
        match (self.minimum, self.incomparable_pairs.first()) {
            (None, Some(&(a, b))) if !self.noncovered_nonstandard.is_empty() => Step::Pair(a, b),
            _ => Step::Minimum,
        }
    }
}

/// Which conditioning applies to an open, reduced state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Pair(Position, Position),
    Minimum,
}

pub fn classify_entries(s: &ExpRapState) -> Classification {
    let occ = s.occurrences();
    let kinds: Vec<EntryKind> = s
        .positions()
        .map(|p| {
            if s.entry(p).is_zero() {
                EntryKind::Zero
            } else if s.is_standard_with(p, &occ) {
                EntryKind::Standard
            } else {
                EntryKind::Nonstandard
            }
        })
        .collect();
    let z = s.zero_pattern();
    let cover = row_maximal_cover(&z);
    let independent_zeros = cover.len();
    let noncovered_nonstandard: Vec<Position> = s
        .positions()
        .filter(|&p| {
            kinds[p.row * s.n + p.col] == EntryKind::Nonstandard && !cover.covers_position(p)
        })
        .collect();
    let strictly_below = |a: Position, b: Position| {
        let (ea, eb) = (s.entry(a), s.entry(b));
        ea.le(eb) && ea != eb
    };
    let potentially_minimal: Vec<Position> = noncovered_nonstandard
        .iter()
        .copied()
        .filter(|&u| !noncovered_nonstandard.iter().any(|&v| strictly_below(v, u)))
        .collect();
    let minimum = noncovered_nonstandard.iter().copied().find(|&u| {
        noncovered_nonstandard
            .iter()
            .all(|&v| s.entry(u).le(s.entry(v)))
    });
    let mut incomparable_pairs = Vec::new();
    for (i, &a) in potentially_minimal.iter().enumerate() {
        for &b in &potentially_minimal[i + 1..] {
            if !s.entry(a).comparable(s.entry(b)) {
                incomparable_pairs.push((a, b));
            }
        }
    }
    Classification {
        kinds,
        cover,
        independent_zeros,
        noncovered_nonstandard,
        potentially_minimal,
        minimum,
        incomparable_pairs,
    }
}

/// Lexicographic progress measure of the conditioning recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct InductionMeasure {
    pub neg_independent_zeros: i64,
    pub cover_rows: usize,
    pub potentially_minimal: usize,
    pub pair_disagreement: usize,
    pub minimum_var_count: usize,
}

pub fn induction_measure(s: &ExpRapState) -> InductionMeasure {
    let cls = classify_entries(s);
    let pair_disagreement = match cls.step() {
        Step::Pair(a, b) => {
            let (ea, eb) = (s.entry(a), s.entry(b));
            let mut vars: Vec<VarId> = ea.vars().chain(eb.vars()).collect();
            vars.sort();
            vars.dedup();
            vars.iter().filter(|&&v| ea.coeff(v) != eb.coeff(v)).count()
        }
        Step::Minimum => 0,
    };
    InductionMeasure {
        neg_independent_zeros: -(cls.independent_zeros as i64),
        cover_rows: cls.cover.rows.len(),
        potentially_minimal: cls.potentially_minimal.len(),
        pair_disagreement,
        minimum_var_count: cls.minimum.map_or(0, |p| s.entry(p).var_count()),
    }
}

/// A child state with its conditional probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub weight: RationalValue,
    pub state: ExpRapState,
}

/// Splits on which of `(a1 - a2) X_i` and `(b2 - b1) X_j` is smaller, where
/// `X_i` is the first variable with a larger coefficient in `u1` and `X_j` the
/// first with a larger coefficient in `u2`.
pub fn condition_pair(s: &ExpRapState, u1: Position, u2: Position) -> Result<[Branch; 2]> {
    let (e1, e2) = (s.entry(u1), s.entry(u2));
    let larger_in = |a: &super::state::LinearEntry, b: &super::state::LinearEntry| {
        let mut vars: Vec<VarId> = a.vars().collect();
        vars.sort();
        vars.into_iter().find(|&v| a.coeff(v) > b.coeff(v))
    };
    let (Some(i), Some(j)) = (larger_in(e1, e2), larger_in(e2, e1)) else {
        return Err(RapError::InvalidParameter(format!(
            "entries at {u1} and {u2} are comparable"
        )));
    };
    let da = e1.coeff(i) - e2.coeff(i);
    let db = e2.coeff(j) - e1.coeff(j);
    let intensity = |v: VarId| s.intensity(v).cloned().expect("variable in table");
    let alpha = intensity(i) / da.clone();
    let beta = intensity(j) / db.clone();
    let total = &alpha + &beta;

    // `first` is the smaller scaled term, `second = first + gap`.
    let split = |first: VarId,
                 first_scale: &RationalValue,
                 second: VarId,
                 second_scale: &RationalValue,
                 gap_rate: &RationalValue| {
        let mut child = s.clone();
        let y = child.fresh_var(total.clone());
        let gap = child.fresh_var(gap_rate.clone());
        child.substitute_everywhere(first, &[(y, first_scale.recip())]);
        let inv = second_scale.recip();
        child.substitute_everywhere(second, &[(y, inv.clone()), (gap, inv)]);
        child.normalize();
        child
    };
    let q = split(i, &da, j, &db, &beta);
    let r = split(j, &db, i, &da, &alpha);
    Ok([
        Branch {
            weight: &alpha / &total,
            state: q,
        },
        Branch {
            weight: &beta / &total,
            state: r,
        },
    ])
}

/// Children of [`condition_minimum`] plus the expected cost extracted.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimumSplit {
    /// `(k - |c|) / I(Y)`, already added to every child's `accumulated`.
    pub extracted: RationalValue,
    pub children: Vec<Branch>,
}

/// One member of the conditioning set: the term `coeff * var`.
#[derive(Debug, Clone)]
struct Term {
    var: VarId,
    coeff: RationalValue,
    rate: RationalValue,
}

/// Conditions on the minimum `Y` of the non-covered standard entries and one
/// term `a X_i` of the minimal non-covered nonstandard entry, then subtracts
/// `Y` from non-covered entries and adds it to doubly covered ones.
pub fn condition_minimum(s: &ExpRapState) -> Result<MinimumSplit> {
    let cls = classify_entries(s);
    if cls.cover.len() >= s.k {
        return Err(RapError::OracleInvariant(
            "k independent zeros present".into(),
        ));
    }
    if cls.step() != Step::Minimum {
        return Err(RapError::InvalidParameter(
            "non-covered nonstandard entries have no minimum".into(),
        ));
    }
    let intensity = |v: VarId| s.intensity(v).cloned().expect("variable in table");
    let mut terms: Vec<Term> = Vec::new();
    if let Some(pm) = cls.minimum {
        let (var, coeff) = s
            .entry(pm)
            .terms()
            .next()
            .map(|(v, c)| (v, c.clone()))
            .expect("nonstandard entry is nonzero");
        let rate = intensity(var) / coeff.clone();
        terms.push(Term { var, coeff, rate });
    }
    for p in s.positions() {
        if cls.kind(s.n, p) == EntryKind::Standard && !cls.cover.covers_position(p) {
            let (var, coeff) = s
                .entry(p)
                .terms()
                .next()
                .map(|(v, c)| (v, c.clone()))
                .expect("standard entry has one term");
            let rate = intensity(var) / coeff.clone();
            terms.push(Term { var, coeff, rate });
        }
    }
    if terms.is_empty() {
        return Err(RapError::OracleInvariant(
            "nothing to condition on in a reduced state".into(),
        ));
    }
    let total: RationalValue = terms.iter().map(|t| t.rate.clone()).sum();
    let free_lines = (s.k - cls.cover.len()) as u64;
    let extracted = RationalValue::from(free_lines) / total.clone();

    let mut children = Vec::with_capacity(terms.len());
    for (t_idx, t) in terms.iter().enumerate() {
        let mut child = s.clone();
        let y = child.fresh_var(total.clone());
        for (s_idx, other) in terms.iter().enumerate() {
            let inv = other.coeff.recip();
            if s_idx == t_idx {
                child.substitute_everywhere(other.var, &[(y, inv)]);
            } else {
                let w = child.fresh_var(other.rate.clone());
                child.substitute_everywhere(other.var, &[(y, inv.clone()), (w, inv)]);
            }
        }
        let one = RationalValue::one();
        let minus_one = -RationalValue::one();
        for p in s.positions() {
            let row_in = cls.cover.rows.contains(&p.row);
            let col_in = cls.cover.cols.contains(&p.col);
            if !row_in && !col_in {
                child.entry_mut(p).add_term(y, &minus_one)?;
            } else if row_in && col_in {
                child.entry_mut(p).add_term(y, &one)?;
            }
        }
        child.accumulated = &child.accumulated + &extracted;
        child.normalize();
        children.push(Branch {
            weight: &t.rate / &total,
            state: child,
        });
    }
    Ok(MinimumSplit {
        extracted,
        children,
    })
}
