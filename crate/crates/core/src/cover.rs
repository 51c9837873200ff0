//! König machinery on zero patterns and the cover-coefficient tables.
//!
//! A partial (k-1)-cover is a set of lines contained in some cover of the
//! zeros with exactly k-1 lines. By König's theorem a line set `(R, C)` is
//! such a subset iff the zeros it leaves uncovered have a maximum matching of
//! size at most `k - 1 - |R| - |C|`.

use std::collections::BTreeMap;

use dashmap::DashMap;
use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{RapError, Result};
use crate::exec::Execution;
use crate::model::{Position, RapInstance, ZeroPattern};

/// A set of rows and columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LineCover {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl LineCover {
    pub fn len(&self) -> usize {
        self.rows.len() + self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn covers_position(&self, p: Position) -> bool {
        self.rows.contains(&p.row) || self.cols.contains(&p.col)
    }

    pub fn covers(&self, z: &ZeroPattern) -> bool {
        z.zeros().iter().all(|&p| self.covers_position(p))
    }

    pub fn doubly_covers(&self, p: Position) -> bool {
        self.rows.contains(&p.row) && self.cols.contains(&p.col)
    }
}

/// Maximum matching in a bipartite graph given as row adjacency lists.
#[derive(Debug, Clone)]
pub struct Matching {
    pub size: usize,
    pub row_match: Vec<Option<usize>>,
    pub col_match: Vec<Option<usize>>,
}

/// Kuhn's augmenting-path matching.
pub fn bipartite_matching(adj: &[Vec<usize>], n_cols: usize) -> Matching {
    fn augment(
        r: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        row_match: &mut [Option<usize>],
        col_match: &mut [Option<usize>],
    ) -> bool {
        for &c in &adj[r] {
            if seen[c] {
                continue;
            }
            seen[c] = true;
            let free = match col_match[c] {
                None => true,
                Some(r2) => augment(r2, adj, seen, row_match, col_match),
            };
            if free {
                row_match[r] = Some(c);
                col_match[c] = Some(r);
                return true;
            }
        }
        false
    }

    let mut row_match = vec![None; adj.len()];
    let mut col_match = vec![None; n_cols];
    let mut size = 0;
    let mut seen = vec![false; n_cols];
    for r in 0..adj.len() {
        seen.iter_mut().for_each(|s| *s = false);
        if augment(r, adj, &mut seen, &mut row_match, &mut col_match) {
            size += 1;
        }
    }
    Matching {
        size,
        row_match,
        col_match,
    }
}

/// Size of a largest independent set of zeros.
pub fn max_independent_zeros(z: &ZeroPattern) -> usize {
    bipartite_matching(&z.adjacency(), z.cols()).size
}

/// The optimal cover whose row set contains the rows of every optimal cover.
///
/// Rows reachable from unmatched rows by zero-alternating paths belong to no
/// optimal cover and the columns reached belong to all of them; taking every
/// other row yields the row-maximal lattice extreme.
pub fn row_maximal_cover(z: &ZeroPattern) -> LineCover {
    let adj = z.adjacency();
    let matching = bipartite_matching(&adj, z.cols());
    let mut row_reached = vec![false; z.rows()];
    let mut col_reached = vec![false; z.cols()];
    let mut stack: Vec<usize> = (0..z.rows())
        .filter(|&r| matching.row_match[r].is_none())
        .collect();
    for &r in &stack {
        row_reached[r] = true;
    }
    while let Some(r) = stack.pop() {
        for &c in &adj[r] {
            if col_reached[c] {
                continue;
            }
            col_reached[c] = true;
            if let Some(r2) = matching.col_match[c] {
                if !row_reached[r2] {
                    row_reached[r2] = true;
                    stack.push(r2);
                }
            }
        }
    }
    LineCover {
        rows: (0..z.rows()).filter(|&r| !row_reached[r]).collect(),
        cols: (0..z.cols()).filter(|&c| col_reached[c]).collect(),
    }
}

pub fn column_maximal_cover(z: &ZeroPattern) -> LineCover {
    let t = row_maximal_cover(&z.transpose());
    LineCover {
        rows: t.cols,
        cols: t.rows,
    }
}

/// A minimum cover (the row-maximal one).
pub fn min_cover(z: &ZeroPattern) -> LineCover {
    row_maximal_cover(z)
}

/// Bit-set of residual zeros, used as a memo key.
fn residual_key(z: &ZeroPattern, rows: &[usize], cols: &[usize]) -> Vec<u64> {
    let n = z.cols();
    let mut key = vec![0u64; (z.rows() * n).div_ceil(64)];
    for p in z.zeros() {
        if rows.contains(&p.row) || cols.contains(&p.col) {
            continue;
        }
        let idx = p.row * n + p.col;
        key[idx / 64] |= 1 << (idx % 64);
    }
    key
}

fn residual_matching(z: &ZeroPattern, rows: &[usize], cols: &[usize]) -> usize {
    let mut adj = vec![Vec::new(); z.rows()];
    for p in z.zeros() {
        if !rows.contains(&p.row) && !cols.contains(&p.col) {
            adj[p.row].push(p.col);
        }
    }
    bipartite_matching(&adj, z.cols()).size
}

/// True iff `(rows, cols)` is contained in some (k-1)-cover of the zeros.
pub fn is_partial_cover(p: &RapInstance, rows: &[usize], cols: &[usize]) -> bool {
    let used = rows.len() + cols.len();
    if used >= p.k() {
        return false;
    }
    residual_matching(p.pattern(), rows, cols) <= p.k() - 1 - used
}

struct PartialCoverCounter<'a> {
    instance: &'a RapInstance,
    cache: DashMap<Vec<u64>, usize>,
}

impl<'a> PartialCoverCounter<'a> {
    fn new(instance: &'a RapInstance) -> Self {
        PartialCoverCounter {
            instance,
            cache: DashMap::new(),
        }
    }

    fn is_partial(&self, rows: &[usize], cols: &[usize]) -> bool {
        let used = rows.len() + cols.len();
        let k = self.instance.k();
        if used >= k {
            return false;
        }
        let z = self.instance.pattern();
        let key = residual_key(z, rows, cols);
        let size = match self.cache.get(&key) {
            Some(v) => *v,
            None => {
                let v = residual_matching(z, rows, cols);
                self.cache.insert(key, v);
                v
            }
        };
        size <= k - 1 - used
    }
}

/// Cover coefficients `d[i][j]` for `0 <= i + j < k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverProfile {
    k: usize,
    m: usize,
    n: usize,
    coefficients: BTreeMap<(usize, usize), u64>,
}

impl CoverProfile {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    /// `d_{i,j}`; zero outside `0 <= i + j < k`.
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.coefficients.get(&(i, j)).copied().unwrap_or(0)
    }

    /// Stored `(i, j, d_{i,j})` triples sorted by `(i, j)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.coefficients.iter().map(|(&(i, j), &d)| (i, j, d))
    }

    pub fn to_json(&self) -> CoverProfileJson {
        CoverProfileJson {
            k: self.k,
            d: self
                .entries()
                .map(|(i, j, d)| (i, j, d.to_string()))
                .collect(),
        }
    }
}

/// Wire form: `{"k": 2, "d": [[0, 0, "1"], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverProfileJson {
    pub k: usize,
    pub d: Vec<(usize, usize, String)>,
}

pub fn cover_profile(p: &RapInstance) -> CoverProfile {
    cover_profile_with(p, Execution::default())
}

/// Counts partial (k-1)-covers by direct enumeration of row subsets times
/// column subsets. Row subsets are distributed across threads; the residual
/// matching cache is shared.
pub fn cover_profile_with(p: &RapInstance, exec: Execution) -> CoverProfile {
    let (m, n, k) = (p.m(), p.n(), p.k());
    let counter = PartialCoverCounter::new(p);
    let row_sets: Vec<Vec<usize>> = (0..k.min(m + 1))
        .flat_map(|i| (0..m).combinations(i))
        .collect();
    let partials = exec.map_slice(&row_sets, |rows| {
        let i = rows.len();
        let mut local = vec![0u64; k - i];
        for (j, slot) in local.iter_mut().enumerate() {
            if j > n {
                break;
            }
            *slot = (0..n)
                .combinations(j)
                .filter(|cols| counter.is_partial(rows, cols))
                .count() as u64;
        }
        (i, local)
    });
    let mut coefficients = BTreeMap::new();
    for i in 0..k {
        for j in 0..k - i {
            coefficients.insert((i, j), 0u64);
        }
    }
    for (i, local) in partials {
        for (j, d) in local.into_iter().enumerate() {
            *coefficients.get_mut(&(i, j)).expect("index in range") += d;
        }
    }
    CoverProfile {
        k,
        m,
        n,
        coefficients,
    }
}

/// `d̄_{i,0}`: partial (k-1)-covers made of `i` rows, none of them `r`.
/// Indexed by `i` in `0..k`; larger `i` are zero.
pub fn row_excluded_profile(p: &RapInstance, r: usize) -> Result<Vec<u64>> {
    if r >= p.m() {
        return Err(RapError::IndexOutOfRange {
            index: r,
            limit: p.m(),
        });
    }
    let counter = PartialCoverCounter::new(p);
    let others: Vec<usize> = (0..p.m()).filter(|&x| x != r).collect();
    Ok((0..p.k())
        .map(|i| {
            others
                .iter()
                .copied()
                .combinations(i)
                .filter(|rows| counter.is_partial(rows, &[]))
                .count() as u64
        })
        .collect())
}

/// True iff `col` belongs to every (k-1)-cover of the zeros.
///
/// A (k-1)-cover avoiding `col` must take every row holding a zero of `col`;
/// it exists iff those rows plus a minimum cover of what remains fit in
/// `k - 1` lines.
pub fn column_in_every_cover(z: &ZeroPattern, k: usize, col: usize) -> bool {
    if k == 0 {
        return false;
    }
    let forced: Vec<usize> = z
        .zeros()
        .iter()
        .filter(|p| p.col == col)
        .map(|p| p.row)
        .collect();
    forced.len() + residual_matching(z, &forced, &[col]) > k - 1
}

pub fn row_in_every_cover(z: &ZeroPattern, k: usize, row: usize) -> bool {
    column_in_every_cover(&z.transpose(), k, row)
}
