//! Exact minimum-cost k-assignment on rectangular nonnegative matrices.
//!
//! The solver runs successive shortest augmenting paths with node potentials
//! (dense Dijkstra), one augmentation per unit of `k`, so partial and
//! rectangular assignments need no padding. Cost ties are broken towards the
//! lexicographically smallest sorted position list by carrying a secondary
//! tie weight alongside every entry.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Debug;

use crate::error::{RapError, Result};
use crate::model::{Assignment, Position};
use crate::rational::RationalValue;

/// Numeric entry type accepted by the solver.
pub trait Weight: Clone + Debug + Send + Sync {
    fn zero() -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    /// Total order on valid (finite) values.
    fn compare(&self, rhs: &Self) -> Ordering;
    /// Finite and nonnegative.
    fn is_valid_cost(&self) -> bool;
    /// Equality used when collecting tied optima.
    fn tie_eq(&self, rhs: &Self) -> bool;
}

/// Relative tolerance for float ties in [`enumerate_optimal_assignments`].
pub const FLOAT_TIE_TOLERANCE: f64 = 1e-12;

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn compare(&self, rhs: &Self) -> Ordering {
        self.total_cmp(rhs)
    }
    fn is_valid_cost(&self) -> bool {
        self.is_finite() && *self >= 0.0
    }
    fn tie_eq(&self, rhs: &Self) -> bool {
        let scale = self.abs().max(rhs.abs());
        (self - rhs).abs() <= FLOAT_TIE_TOLERANCE * scale
    }
}

impl Weight for RationalValue {
    fn zero() -> Self {
        RationalValue::zero()
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn compare(&self, rhs: &Self) -> Ordering {
        self.cmp(rhs)
    }
    fn is_valid_cost(&self) -> bool {
        !self.is_negative()
    }
    fn tie_eq(&self, rhs: &Self) -> bool {
        self == rhs
    }
}

/// Dense row-major cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<W> {
    m: usize,
    n: usize,
    entries: Vec<W>,
}

impl<W: Weight> CostMatrix<W> {
    pub fn from_vec(m: usize, n: usize, entries: Vec<W>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(RapError::EmptyDimension { m, n });
        }
        if entries.len() != m * n {
            return Err(RapError::InvalidParameter(format!(
                "expected {} entries, got {}",
                m * n,
                entries.len()
            )));
        }
        for (i, w) in entries.iter().enumerate() {
            if !w.is_valid_cost() {
                return Err(RapError::BadEntry {
                    row: i / n,
                    col: i % n,
                });
            }
        }
        Ok(CostMatrix { m, n, entries })
    }

    pub fn from_rows(rows: Vec<Vec<W>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(RapError::InvalidParameter("ragged rows".into()));
        }
        Self::from_vec(m, n, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> &W {
        &self.entries[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, w: W) {
        self.entries[r * self.n + c] = w;
    }

    /// Sum of the entries at `positions`.
    pub fn cost_of(&self, positions: &[Position]) -> W {
        positions
            .iter()
            .fold(W::zero(), |acc, p| acc.add(self.get(p.row, p.col)))
    }

    fn check_k(&self, k: usize) -> Result<()> {
        let max = self.m.min(self.n);
        if k == 0 || k > max {
            return Err(RapError::InvalidK { k, max });
        }
        Ok(())
    }
}

impl CostMatrix<RationalValue> {
    pub fn from_integers(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| RationalValue::from(v)).collect())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<W> {
    pub cost: W,
    pub assignment: Assignment,
}

/// Primary cost plus a lexicographic tie weight.
#[derive(Debug, Clone)]
struct LexCost<W> {
    primary: W,
    tie: i128,
}

/// Cells beyond this count get no tie weight (the power-of-two weights would
/// overflow `i128` once summed along paths).
const MAX_TIE_CELLS: usize = 96;

impl<W: Weight> LexCost<W> {
    fn zero() -> Self {
        LexCost {
            primary: W::zero(),
            tie: 0,
        }
    }
    fn add(&self, rhs: &Self) -> Self {
        LexCost {
            primary: self.primary.add(&rhs.primary),
            tie: self.tie + rhs.tie,
        }
    }
    fn sub(&self, rhs: &Self) -> Self {
        LexCost {
            primary: self.primary.sub(&rhs.primary),
            tie: self.tie - rhs.tie,
        }
    }
    fn compare(&self, rhs: &Self) -> Ordering {
        self.primary
            .compare(&rhs.primary)
            .then(self.tie.cmp(&rhs.tie))
    }
}

/// Minimum-cost `k`-assignment. Among cost ties, the lexicographically
/// smallest sorted position list wins.
pub fn solve_k_assignment<W: Weight>(matrix: &CostMatrix<W>, k: usize) -> Result<SolveResult<W>> {
    matrix.check_k(k)?;
    let (m, n) = (matrix.m, matrix.n);
    let cells = m * n;
    let use_tie = cells <= MAX_TIE_CELLS;
    // Minimizing sum(2^N - 2^(N-1-idx)) maximizes sum(2^(N-1-idx)), and the
    // largest power in a symmetric difference decides the comparison.
    let edge = |r: usize, c: usize| -> LexCost<W> {
        let tie = if use_tie {
            let idx = r * n + c;
            (1i128 << cells) - (1i128 << (cells - 1 - idx))
        } else {
            0
        };
        LexCost {
            primary: matrix.get(r, c).clone(),
            tie,
        }
    };

    let mut row_match: Vec<Option<usize>> = vec![None; m];
    let mut col_match: Vec<Option<usize>> = vec![None; n];
    let mut pot_row = vec![LexCost::<W>::zero(); m];
    let mut pot_col = vec![LexCost::<W>::zero(); n];

    for _ in 0..k {
        let mut dist_row: Vec<Option<LexCost<W>>> = row_match
            .iter()
            .map(|mc| mc.is_none().then(LexCost::zero))
            .collect();
        let mut dist_col: Vec<Option<LexCost<W>>> = vec![None; n];
        let mut parent_col = vec![usize::MAX; n];
        let mut done_row = vec![false; m];
        let mut done_col = vec![false; n];

        loop {
            // Dense Dijkstra: pick the closest unsettled node.
            let mut best: Option<(bool, usize)> = None;
            let mut best_d: Option<&LexCost<W>> = None;
            for (r, d) in dist_row.iter().enumerate() {
                if let (false, Some(d)) = (done_row[r], d) {
                    if best_d.is_none_or(|b| d.compare(b) == Ordering::Less) {
                        best = Some((true, r));
                        best_d = Some(d);
                    }
                }
            }
            for (c, d) in dist_col.iter().enumerate() {
                if let (false, Some(d)) = (done_col[c], d) {
                    if best_d.is_none_or(|b| d.compare(b) == Ordering::Less) {
                        best = Some((false, c));
                        best_d = Some(d);
                    }
                }
            }
            let Some((is_row, u)) = best else { break };
            if is_row {
                done_row[u] = true;
                let du = dist_row[u].clone().expect("settled row has a distance");
                for c in 0..n {
                    if done_col[c] || row_match[u] == Some(c) {
                        continue;
                    }
                    let nd = du.add(&edge(u, c)).add(&pot_row[u]).sub(&pot_col[c]);
                    if dist_col[c]
                        .as_ref()
                        .is_none_or(|old| nd.compare(old) == Ordering::Less)
                    {
                        dist_col[c] = Some(nd);
                        parent_col[c] = u;
                    }
                }
            } else {
                done_col[u] = true;
                if let Some(r) = col_match[u] {
                    if !done_row[r] {
                        let du = dist_col[u].clone().expect("settled column has a distance");
                        let back = LexCost::zero().sub(&edge(r, u));
                        let nd = du.add(&back).add(&pot_col[u]).sub(&pot_row[r]);
                        if dist_row[r]
                            .as_ref()
                            .is_none_or(|old| nd.compare(old) == Ordering::Less)
                        {
                            dist_row[r] = Some(nd);
                        }
                    }
                }
            }
        }

        // Cheapest free column by true (unreduced) distance.
        let mut target: Option<(usize, LexCost<W>)> = None;
        for c in 0..n {
            if col_match[c].is_some() {
                continue;
            }
            if let Some(d) = &dist_col[c] {
                let true_d = d.add(&pot_col[c]);
                if target
                    .as_ref()
                    .is_none_or(|(_, t)| true_d.compare(t) == Ordering::Less)
                {
                    target = Some((c, true_d));
                }
            }
        }
        let (mut c, _) = target.expect("a free column is reachable while k <= min(m, n)");

        for (p, d) in pot_row.iter_mut().zip(&dist_row) {
            if let Some(d) = d {
                *p = p.add(d);
            }
        }
        for (p, d) in pot_col.iter_mut().zip(&dist_col) {
            if let Some(d) = d {
                *p = p.add(d);
            }
        }

        loop {
            let r = parent_col[c];
            let prev = row_match[r];
            row_match[r] = Some(c);
            col_match[c] = Some(r);
            match prev {
                Some(pc) => c = pc,
                None => break,
            }
        }
    }

    let positions: Vec<Position> = row_match
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| Position::new(r, c)))
        .collect();
    let cost = matrix.cost_of(&positions);
    Ok(SolveResult {
        cost,
        assignment: Assignment::from_sorted_unchecked(positions),
    })
}

/// Default cap on the number of candidate k-sets visited by the exhaustive
/// routines.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 5_000_000;

/// Number of independent k-sets in an `m x n` matrix: `C(m,k) * n!/(n-k)!`.
pub fn count_k_assignments(m: usize, n: usize, k: usize) -> u128 {
    if k > m.min(n) {
        return 0;
    }
    let mut count: u128 = 1;
    for i in 0..k {
        count = count * (m - i) as u128 / (i + 1) as u128;
    }
    for i in 0..k {
        count *= (n - i) as u128;
    }
    count
}

/// Visits every independent k-set, in lexicographic order of sorted
/// position lists.
fn for_each_k_set(m: usize, n: usize, k: usize, mut visit: impl FnMut(&[Position])) {
    fn rec(
        row: usize,
        m: usize,
        n: usize,
        k: usize,
        used: &mut [bool],
        current: &mut Vec<Position>,
        visit: &mut dyn FnMut(&[Position]),
    ) {
        if current.len() == k {
            visit(current);
            return;
        }
        if m - row < k - current.len() {
            return;
        }
        for c in 0..n {
            if !used[c] {
                used[c] = true;
                current.push(Position::new(row, c));
                rec(row + 1, m, n, k, used, current, visit);
                current.pop();
                used[c] = false;
            }
        }
        rec(row + 1, m, n, k, used, current, visit);
    }
    let mut used = vec![false; n];
    let mut current = Vec::with_capacity(k);
    rec(0, m, n, k, &mut used, &mut current, &mut visit);
}

fn check_enumerable<W: Weight>(matrix: &CostMatrix<W>, k: usize, limit: u128) -> Result<()> {
    matrix.check_k(k)?;
    let count = count_k_assignments(matrix.m, matrix.n, k);
    if count > limit {
        return Err(RapError::TooLarge { count, limit });
    }
    Ok(())
}

/// Exhaustive minimum over all independent k-sets with the same tie rule as
/// [`solve_k_assignment`].
pub fn brute_force_k_assignment<W: Weight>(
    matrix: &CostMatrix<W>,
    k: usize,
) -> Result<SolveResult<W>> {
    brute_force_k_assignment_with_limit(matrix, k, DEFAULT_ENUMERATION_LIMIT)
}

pub fn brute_force_k_assignment_with_limit<W: Weight>(
    matrix: &CostMatrix<W>,
    k: usize,
    limit: u128,
) -> Result<SolveResult<W>> {
    check_enumerable(matrix, k, limit)?;
    let mut best: Option<(W, Vec<Position>)> = None;
    // Enumeration order is lexicographic, so the first strict minimum seen is
    // also the lexicographically smallest tie.
    for_each_k_set(matrix.m, matrix.n, k, |set| {
        let cost = matrix.cost_of(set);
        if best
            .as_ref()
            .is_none_or(|(b, _)| cost.compare(b) == Ordering::Less)
        {
            best = Some((cost, set.to_vec()));
        }
    });
    let (cost, positions) = best.expect("at least one k-set exists");
    Ok(SolveResult {
        cost,
        assignment: Assignment::from_sorted_unchecked(positions),
    })
}

/// All independent k-sets attaining the minimal cost (float ties within a
/// relative [`FLOAT_TIE_TOLERANCE`]).
pub fn enumerate_optimal_assignments<W: Weight>(
    matrix: &CostMatrix<W>,
    k: usize,
) -> Result<Vec<Assignment>> {
    check_enumerable(matrix, k, DEFAULT_ENUMERATION_LIMIT)?;
    let mut min: Option<W> = None;
    for_each_k_set(matrix.m, matrix.n, k, |set| {
        let cost = matrix.cost_of(set);
        if min
            .as_ref()
            .is_none_or(|b| cost.compare(b) == Ordering::Less)
        {
            min = Some(cost);
        }
    });
    let min = min.expect("at least one k-set exists");
    let mut out = Vec::new();
    for_each_k_set(matrix.m, matrix.n, k, |set| {
        if matrix.cost_of(set).tie_eq(&min) {
            out.push(Assignment::from_sorted_unchecked(set.to_vec()));
        }
    });
    Ok(out)
}

/// A sequence of positions alternating between two assignments, consecutive
/// positions sharing a row or a column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlternatingPath {
    pub positions: Vec<Position>,
}

impl AlternatingPath {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Splits `mu △ nu` into maximal alternating paths. Cycles are traversed
/// once from their smallest position.
pub fn symmetric_difference_paths(mu: &Assignment, nu: &Assignment) -> Vec<AlternatingPath> {
    let diff: Vec<Position> = mu
        .positions()
        .iter()
        .filter(|p| !nu.contains(**p))
        .chain(nu.positions().iter().filter(|p| !mu.contains(**p)))
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let adjacent = |a: Position, b: Position| a != b && (a.row == b.row || a.col == b.col);
    let neighbours: Vec<Vec<usize>> = diff
        .iter()
        .map(|&a| {
            diff.iter()
                .enumerate()
                .filter(|(_, &b)| adjacent(a, b))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();

    let mut visited = vec![false; diff.len()];
    let mut paths = Vec::new();
    let walk = |start: usize, visited: &mut Vec<bool>| {
        let mut out = vec![diff[start]];
        visited[start] = true;
        let mut cur = start;
        while let Some(&next) = neighbours[cur].iter().find(|&&j| !visited[j]) {
            visited[next] = true;
            out.push(diff[next]);
            cur = next;
        }
        AlternatingPath { positions: out }
    };
    // Open paths first start at an endpoint, then remaining cycles.
    let mut starts: Vec<usize> = (0..diff.len())
        .filter(|&i| neighbours[i].len() < 2)
        .collect();
    starts.extend((0..diff.len()).filter(|&i| neighbours[i].len() >= 2));
    for s in starts {
        if !visited[s] {
            paths.push(walk(s, &mut visited));
        }
    }
    paths.sort_by(|a, b| {
        let ma = a.positions.iter().min();
        let mb = b.positions.iter().min();
        ma.cmp(&mb)
    });
    paths
}
