//! Canonical memo keys for symbolic states.
//!
//! The value of a state is invariant under row and column permutations,
//! transposition and renaming of variables. For small matrices every
//! permutation pair is tried and the smallest key wins; larger ones keep
//! their row/column order and only get variables renumbered.

use itertools::Itertools;

use crate::model::Position;
use crate::rational::RationalValue;

use super::state::{ExpRapState, VarId};

/// Above this many `(row perm, col perm)` pairs the identity order is used.
const MAX_PERMUTATION_PAIRS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    k: usize,
    m: usize,
    n: usize,
    entries: Vec<Vec<(u32, RationalValue)>>,
}

impl CanonicalKey {
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }
}

fn factorial(x: usize) -> usize {
    (1..=x).product()
}

fn key_for(
    s: &ExpRapState,
    transposed: bool,
    row_order: &[usize],
    col_order: &[usize],
) -> CanonicalKey {
    let (m, n) = if transposed { (s.n, s.m) } else { (s.m, s.n) };
    let mut names: Vec<(VarId, u32)> = Vec::new();
    let mut entries = Vec::with_capacity(m * n);
    for &r in row_order {
        for &c in col_order {
            let p = if transposed {
                Position::new(c, r)
            } else {
                Position::new(r, c)
            };
            let mut terms: Vec<(VarId, &RationalValue)> = s.entry(p).terms().collect();
            terms.sort_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(&b.0)));
            let mut renamed: Vec<(u32, RationalValue)> = terms
                .into_iter()
                .map(|(v, coeff)| {
                    let id = match names.iter().find(|(old, _)| *old == v) {
                        Some(&(_, new)) => new,
                        None => {
                            let new = names.len() as u32;
                            names.push((v, new));
                            new
                        }
                    };
                    (id, coeff.clone())
                })
                .collect();
            renamed.sort();
            entries.push(renamed);
        }
    }
    CanonicalKey {
        k: s.k,
        m,
        n,
        entries,
    }
}

/// Memo key of a normalized state (all intensities 1).
pub fn canonical_key(s: &ExpRapState) -> CanonicalKey {
    let mut best: Option<CanonicalKey> = None;
    for transposed in [false, true] {
        let (m, n) = if transposed { (s.n, s.m) } else { (s.m, s.n) };
        let exhaustive = factorial(m).saturating_mul(factorial(n)) <= MAX_PERMUTATION_PAIRS;
        let mut consider = |rows: &[usize], cols: &[usize]| {
            let key = key_for(s, transposed, rows, cols);
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        };
        if exhaustive {
            let col_perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
            for rows in (0..m).permutations(m) {
                for cols in &col_perms {
                    consider(&rows, cols);
                }
            }
        } else {
            let rows: Vec<usize> = (0..m).collect();
            let cols: Vec<usize> = (0..n).collect();
            consider(&rows, &cols);
        }
    }
    best.expect("at least one ordering")
}
