//! Symbolic states: matrices of nonnegative rational combinations of
//! independent exponential variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{RapError, Result};
use crate::model::{Position, RapInstance, ZeroPattern};
use crate::rational::RationalValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.0)
    }
}

/// An exponential variable with a positive rational intensity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpVariable {
    pub id: VarId,
    pub intensity: RationalValue,
}

/// `sum c_v X_v` with strictly positive stored coefficients; the empty map is
/// the constant zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinearEntry {
    terms: BTreeMap<VarId, RationalValue>,
}

impl LinearEntry {
    pub fn zero() -> Self {
        LinearEntry::default()
    }

    pub fn single(v: VarId, coeff: RationalValue) -> Self {
        let mut e = LinearEntry::zero();
        e.terms.insert(v, coeff);
        e
    }

    pub fn from_terms<I: IntoIterator<Item = (VarId, RationalValue)>>(terms: I) -> Self {
        let mut e = LinearEntry::zero();
        for (v, c) in terms {
            e.add_term(v, &c).expect("nonnegative construction");
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, v: VarId) -> RationalValue {
        self.terms.get(&v).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, &RationalValue)> + '_ {
        self.terms.iter().map(|(v, c)| (*v, c))
    }

    pub fn var_count(&self) -> usize {
        self.terms.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.terms.keys().copied()
    }

    /// Adds `delta * v`; fails if a coefficient would turn negative.
    pub fn add_term(&mut self, v: VarId, delta: &RationalValue) -> Result<()> {
        let next = self.coeff(v) + delta.clone();
        if next.is_negative() {
            return Err(RapError::OracleInvariant(format!(
                "coefficient of {v} would become {next}"
            )));
        }
        if next.is_zero() {
            self.terms.remove(&v);
        } else {
            self.terms.insert(v, next);
        }
        Ok(())
    }

    /// Replaces `v` by `sum c_w W_w`.
    pub fn substitute(&mut self, v: VarId, replacement: &[(VarId, RationalValue)]) {
        if let Some(b) = self.terms.remove(&v) {
            for (w, c) in replacement {
                self.add_term(*w, &(&b * c))
                    .expect("nonnegative substitution");
            }
        }
    }

    /// Coefficient-wise `self <= other`.
    pub fn le(&self, other: &LinearEntry) -> bool {
        self.terms.iter().all(|(v, c)| *c <= other.coeff(*v))
    }

    pub fn comparable(&self, other: &LinearEntry) -> bool {
        self.le(other) || other.le(self)
    }
}

impl fmt::Display for LinearEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (v, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{v}")?;
        }
        Ok(())
    }
}

/// Working state of the symbolic evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpRapState {
    pub(crate) k: usize,
    pub(crate) m: usize,
    pub(crate) n: usize,
    pub(crate) entries: Vec<LinearEntry>,
    pub(crate) variables: BTreeMap<VarId, RationalValue>,
    pub(crate) accumulated: RationalValue,
    pub(crate) next_var: u32,
}

impl ExpRapState {
    /// Standard RAP: one fresh intensity-1 variable per nonzero position.
    pub fn from_instance(p: &RapInstance) -> Self {
        let mut state = ExpRapState {
            k: p.k(),
            m: p.m(),
            n: p.n(),
            entries: Vec::with_capacity(p.m() * p.n()),
            variables: BTreeMap::new(),
            accumulated: RationalValue::zero(),
            next_var: 0,
        };
        for r in 0..p.m() {
            for c in 0..p.n() {
                let entry = if p.pattern().is_zero(Position::new(r, c)) {
                    LinearEntry::zero()
                } else {
                    let v = state.fresh_var(RationalValue::one());
                    LinearEntry::single(v, RationalValue::one())
                };
                state.entries.push(entry);
            }
        }
        state
    }

    /// Builds a state from explicit entries and intensities.
    pub fn from_parts(
        k: usize,
        m: usize,
        n: usize,
        entries: Vec<LinearEntry>,
        variables: Vec<ExpVariable>,
    ) -> Result<Self> {
        if entries.len() != m * n || m == 0 || n == 0 {
            return Err(RapError::InvalidParameter(
                "entry count does not match m x n".into(),
            ));
        }
        if k == 0 || k > m.min(n) {
            return Err(RapError::InvalidK { k, max: m.min(n) });
        }
        let mut table = BTreeMap::new();
        for v in variables {
            if v.intensity.is_negative() || v.intensity.is_zero() {
                return Err(RapError::InvalidParameter(format!(
                    "{} has non-positive intensity",
                    v.id
                )));
            }
            table.insert(v.id, v.intensity);
        }
        for e in &entries {
            if let Some(v) = e.vars().find(|v| !table.contains_key(v)) {
                return Err(RapError::InvalidParameter(format!("{v} has no intensity")));
            }
        }
        let next_var = table.keys().map(|v| v.0 + 1).max().unwrap_or(0);
        Ok(ExpRapState {
            k,
            m,
            n,
            entries,
            variables: table,
            accumulated: RationalValue::zero(),
            next_var,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn accumulated(&self) -> &RationalValue {
        &self.accumulated
    }

    pub fn entry(&self, p: Position) -> &LinearEntry {
        &self.entries[p.row * self.n + p.col]
    }

    pub(crate) fn entry_mut(&mut self, p: Position) -> &mut LinearEntry {
        &mut self.entries[p.row * self.n + p.col]
    }

    pub fn intensity(&self, v: VarId) -> Option<&RationalValue> {
        self.variables.get(&v)
    }

    pub fn variables(&self) -> impl Iterator<Item = ExpVariable> + '_ {
        self.variables.iter().map(|(id, l)| ExpVariable {
            id: *id,
            intensity: l.clone(),
        })
    }

    pub fn positions(&self) -> impl Iterator<Item = Position> {
        let n = self.n;
        (0..self.m * self.n).map(move |i| Position::new(i / n, i % n))
    }

    pub(crate) fn fresh_var(&mut self, intensity: RationalValue) -> VarId {
        let v = VarId(self.next_var);
        self.next_var += 1;
        self.variables.insert(v, intensity);
        v
    }

    /// The identically-zero entries.
    pub fn zero_pattern(&self) -> ZeroPattern {
        ZeroPattern::new(
            self.m,
            self.n,
            self.positions().filter(|&p| self.entry(p).is_zero()),
        )
        .expect("state positions are in range")
    }

    /// Number of entries referencing each variable.
    pub fn occurrences(&self) -> BTreeMap<VarId, usize> {
        let mut occ = BTreeMap::new();
        for e in &self.entries {
            for v in e.vars() {
                *occ.entry(v).or_insert(0) += 1;
            }
        }
        occ
    }

    /// `c X` alone in its entry, referenced nowhere else, and Exp(1)
    /// distributed (`intensity / c == 1`).
    pub(crate) fn is_standard_with(&self, p: Position, occ: &BTreeMap<VarId, usize>) -> bool {
        let e = self.entry(p);
        if e.var_count() != 1 {
            return false;
        }
        let (v, c) = e.terms().next().expect("one term");
        occ.get(&v) == Some(&1) && self.variables.get(&v).is_some_and(|l| l == c)
    }

    pub fn is_standard(&self, p: Position) -> bool {
        self.is_standard_with(p, &self.occurrences())
    }

    pub(crate) fn substitute_everywhere(
        &mut self,
        v: VarId,
        replacement: &[(VarId, RationalValue)],
    ) {
        for e in &mut self.entries {
            e.substitute(v, replacement);
        }
        self.variables.remove(&v);
    }

    /// Rescales every variable to intensity 1 and drops unreferenced ones.
    pub fn normalize(&mut self) {
        let occ = self.occurrences();
        self.variables.retain(|v, _| occ.contains_key(v));
        let scales: Vec<(VarId, RationalValue)> = self
            .variables
            .iter()
            .filter(|(_, l)| **l != RationalValue::one())
            .map(|(v, l)| (*v, l.recip()))
            .collect();
        for (v, s) in scales {
            for e in &mut self.entries {
                if let Some(c) = e.terms.get_mut(&v) {
                    *c = &*c * &s;
                }
            }
            self.variables.insert(v, RationalValue::one());
        }
    }

    pub(crate) fn delete_column(&mut self, c: usize) {
        let n = self.n;
        let mut i = 0;
        self.entries.retain(|_| {
            let keep = i % n != c;
            i += 1;
            keep
        });
        self.n -= 1;
        self.k -= 1;
        self.normalize();
    }

    pub(crate) fn delete_row(&mut self, r: usize) {
        let n = self.n;
        self.entries.drain(r * n..(r + 1) * n);
        self.m -= 1;
        self.k -= 1;
        self.normalize();
    }

    /// All variables referenced by entries exist in the table.
    pub fn is_consistent(&self) -> bool {
        let referenced: BTreeSet<VarId> = self.entries.iter().flat_map(|e| e.vars()).collect();
        referenced.iter().all(|v| self.variables.contains_key(v)) && !self.accumulated.is_negative()
    }
}

impl fmt::Display for ExpRapState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "k={} {}x{} acc={}",
            self.k, self.m, self.n, self.accumulated
        )?;
        for r in 0..self.m {
            let row: Vec<String> = (0..self.n)
                .map(|c| self.entry(Position::new(r, c)).to_string())
                .collect();
            writeln!(f, "  [{}]", row.join(" | "))?;
        }
        Ok(())
    }
}
