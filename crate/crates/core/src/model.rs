//! Zero patterns, instances, assignments and the instance document format.
//!
//! Positions are 0-indexed everywhere. Zero sets are kept as sorted,
//! duplicate-free position lists so that iteration order and hashing are
//! canonical.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{RapError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

impl Position {
    pub const fn new(row: usize, col: usize) -> Self {
        Position { row, col }
    }

    pub fn transposed(self) -> Self {
        Position::new(self.col, self.row)
    }
}

impl From<(usize, usize)> for Position {
    fn from((row, col): (usize, usize)) -> Self {
        Position::new(row, col)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// An `m x n` grid with a set of forced-zero positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZeroPattern {
    m: usize,
    n: usize,
    zeros: Vec<Position>,
}

impl ZeroPattern {
    pub fn new<I, P>(m: usize, n: usize, zeros: I) -> Result<Self>
    where
        I: IntoIterator<Item = P>,
        P: Into<Position>,
    {
        if m == 0 || n == 0 {
            return Err(RapError::EmptyDimension { m, n });
        }
        let mut seen = BTreeSet::new();
        for p in zeros {
            let p = p.into();
            if p.row >= m || p.col >= n {
                return Err(RapError::PositionOutOfRange {
                    row: p.row,
                    col: p.col,
                    m,
                    n,
                });
            }
            if !seen.insert(p) {
                return Err(RapError::DuplicateZero(p));
            }
        }
        Ok(ZeroPattern {
            m,
            n,
            zeros: seen.into_iter().collect(),
        })
    }

    pub fn empty(m: usize, n: usize) -> Result<Self> {
        Self::new(m, n, std::iter::empty::<Position>())
    }

    /// Pattern whose zero set is given by bit `r * n + c` of `mask`.
    pub fn from_mask(m: usize, n: usize, mask: u64) -> Result<Self> {
        let zeros = (0..m * n)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| Position::new(i / n, i % n));
        Self::new(m, n, zeros)
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn zeros(&self) -> &[Position] {
        &self.zeros
    }

    pub fn is_zero(&self, p: Position) -> bool {
        self.zeros.binary_search(&p).is_ok()
    }

    pub fn row_has_zero(&self, r: usize) -> bool {
        self.zeros.iter().any(|p| p.row == r)
    }

    pub fn zeros_in_col(&self, c: usize) -> usize {
        self.zeros.iter().filter(|p| p.col == c).count()
    }

    /// Column lists of zeros, one per row.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m];
        for p in &self.zeros {
            adj[p.row].push(p.col);
        }
        adj
    }

    pub fn transpose(&self) -> ZeroPattern {
        let mut zeros: Vec<Position> = self.zeros.iter().map(|p| p.transposed()).collect();
        zeros.sort();
        ZeroPattern {
            m: self.n,
            n: self.m,
            zeros,
        }
    }
}

/// A standard random assignment problem: a zero pattern plus the assignment
/// size `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RapInstance {
    pattern: ZeroPattern,
    k: usize,
}

impl RapInstance {
    pub fn new(pattern: ZeroPattern, k: usize) -> Result<Self> {
        let max = pattern.m.min(pattern.n);
        if k == 0 || k > max {
            return Err(RapError::InvalidK { k, max });
        }
        Ok(RapInstance { pattern, k })
    }

    /// Convenience constructor from raw zero coordinates.
    pub fn with_zeros(m: usize, n: usize, k: usize, zeros: &[(usize, usize)]) -> Result<Self> {
        Self::new(ZeroPattern::new(m, n, zeros.iter().copied())?, k)
    }

    pub fn no_zeros(m: usize, n: usize, k: usize) -> Result<Self> {
        Self::new(ZeroPattern::empty(m, n)?, k)
    }

    pub fn pattern(&self) -> &ZeroPattern {
        &self.pattern
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.pattern.m
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn zeros(&self) -> &[Position] {
        &self.pattern.zeros
    }

    pub fn transpose(&self) -> RapInstance {
        RapInstance {
            pattern: self.pattern.transpose(),
            k: self.k,
        }
    }

    /// Removes column `c`, decrementing `n` and `k`. Requires
    /// `2 <= k <= min(m, n - 1)`.
    pub fn delete_column(&self, c: usize) -> Result<RapInstance> {
        if c >= self.n() {
            return Err(RapError::IndexOutOfRange {
                index: c,
                limit: self.n(),
            });
        }
        // the original k must still fit once the column is gone
        if self.n() < 2 || self.k < 2 || self.k > self.m().min(self.n() - 1) {
            return Err(RapError::InvalidParameter(format!(
                "cannot delete a column from a {}x{} instance with k = {}",
                self.m(),
                self.n(),
                self.k
            )));
        }
        let zeros = self
            .zeros()
            .iter()
            .filter(|p| p.col != c)
            .map(|p| Position::new(p.row, if p.col > c { p.col - 1 } else { p.col }));
        RapInstance::new(ZeroPattern::new(self.m(), self.n() - 1, zeros)?, self.k - 1)
    }

    /// Removes row `r`, decrementing `m` and `k`.
    pub fn delete_row(&self, r: usize) -> Result<RapInstance> {
        Ok(self.transpose().delete_column(r)?.transpose())
    }

    pub fn insert_zero(&self, pos: Position) -> Result<RapInstance> {
        if self.pattern.is_zero(pos) {
            return Err(RapError::AlreadyZero(pos));
        }
        let zeros = self.zeros().iter().copied().chain(std::iter::once(pos));
        RapInstance::new(ZeroPattern::new(self.m(), self.n(), zeros)?, self.k)
    }

    pub fn to_document(&self) -> InstanceDocument {
        InstanceDocument {
            m: self.m(),
            n: self.n(),
            k: self.k,
            zeros: self.zeros().iter().map(|p| [p.row, p.col]).collect(),
        }
    }
}

impl fmt::Display for RapInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} k={} Z={{", self.m(), self.n(), self.k)?;
        for (i, p) in self.zeros().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// On-disk JSON form: `{"m": 3, "n": 3, "k": 2, "zeros": [[0, 0]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub zeros: Vec<[usize; 2]>,
}

impl InstanceDocument {
    pub fn into_instance(self) -> Result<RapInstance> {
        let pattern = ZeroPattern::new(self.m, self.n, self.zeros.iter().map(|z| (z[0], z[1])))?;
        RapInstance::new(pattern, self.k)
    }
}

pub fn parse_instance(text: &str) -> Result<RapInstance> {
    let doc: InstanceDocument =
        serde_json::from_str(text).map_err(|e| RapError::Malformed(e.to_string()))?;
    doc.into_instance()
}

/// Canonical compact JSON with zeros sorted lexicographically.
pub fn serialize_instance(p: &RapInstance) -> String {
    serde_json::to_string(&p.to_document()).expect("instance document serializes")
}

/// An independent set of positions: no two share a row or a column.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    positions: Vec<Position>,
}

impl Assignment {
    pub fn new<I, P>(positions: I) -> Result<Self>
    where
        I: IntoIterator<Item = P>,
        P: Into<Position>,
    {
        let mut positions: Vec<Position> = positions.into_iter().map(Into::into).collect();
        positions.sort();
        let mut rows = BTreeSet::new();
        let mut cols = BTreeSet::new();
        for p in &positions {
            if !rows.insert(p.row) || !cols.insert(p.col) {
                return Err(RapError::InvalidParameter(format!(
                    "positions are not independent at {p}"
                )));
            }
        }
        Ok(Assignment { positions })
    }

    pub(crate) fn from_sorted_unchecked(positions: Vec<Position>) -> Self {
        Assignment { positions }
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn contains(&self, p: Position) -> bool {
        self.positions.binary_search(&p).is_ok()
    }

    pub fn uses_row(&self, r: usize) -> bool {
        self.positions.iter().any(|p| p.row == r)
    }

    pub fn uses_col(&self, c: usize) -> bool {
        self.positions.iter().any(|p| p.col == c)
    }
}

/// True iff some position of `a` lies in row `r`.
pub fn uses_row(a: &Assignment, r: usize) -> bool {
    a.uses_row(r)
}

/// One realization of a standard RAP: exact zeros on the pattern, strictly
/// positive entries elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMatrix {
    m: usize,
    n: usize,
    entries: Vec<f64>,
    source: ZeroPattern,
}

impl SampledMatrix {
    /// Builds a sampled matrix, checking the zero/positive contract.
    pub fn new(source: ZeroPattern, entries: Vec<f64>) -> Result<Self> {
        let (m, n) = (source.rows(), source.cols());
        if entries.len() != m * n {
            return Err(RapError::InvalidParameter(format!(
                "expected {} entries, got {}",
                m * n,
                entries.len()
            )));
        }
        for (i, &v) in entries.iter().enumerate() {
            let p = Position::new(i / n, i % n);
            let ok = if source.is_zero(p) {
                v == 0.0
            } else {
                v.is_finite() && v > 0.0
            };
            if !ok {
                return Err(RapError::BadEntry {
                    row: p.row,
                    col: p.col,
                });
            }
        }
        Ok(SampledMatrix {
            m,
            n,
            entries,
            source,
        })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> &ZeroPattern {
        &self.source
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.n + c]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_cost_matrix(&self) -> crate::solver::CostMatrix<f64> {
        crate::solver::CostMatrix::from_vec(self.m, self.n, self.entries.clone())
            .expect("sampled entries are valid costs")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        let p = parse_instance(r#"{"m":2,"n":2,"k":2,"zeros":[]}"#).unwrap();
        assert_eq!((p.m(), p.n(), p.k()), (2, 2, 2));
        assert!(p.zeros().is_empty());

        let p = parse_instance(r#"{"m":3,"n":3,"k":2,"zeros":[[0,0]]}"#).unwrap();
        assert_eq!(p.zeros(), &[Position::new(0, 0)]);

        let err = parse_instance(r#"{"m":2,"n":3,"k":3,"zeros":[]}"#).unwrap_err();
        assert_eq!(err, RapError::InvalidK { k: 3, max: 2 });
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_instance("{\"m\":2"),
            Err(RapError::Malformed(_))
        ));
        assert!(matches!(
            parse_instance(r#"{"m":2,"n":2,"k":1,"zeros":[[2,0]]}"#),
            Err(RapError::PositionOutOfRange { .. })
        ));
        assert!(matches!(
            parse_instance(r#"{"m":2,"n":2,"k":1,"zeros":[[1,0],[1,0]]}"#),
            Err(RapError::DuplicateZero(_))
        ));
        assert!(matches!(
            parse_instance(r#"{"m":2,"n":2,"k":0,"zeros":[]}"#),
            Err(RapError::InvalidK { .. })
        ));
        assert!(matches!(
            parse_instance(r#"{"m":0,"n":2,"k":1}"#),
            Err(RapError::EmptyDimension { .. })
        ));
        assert!(matches!(
            parse_instance(r#"{"m":2,"n":2,"k":1,"extra":1}"#),
            Err(RapError::Malformed(_))
        ));
    }

    #[test]
    fn serialization_sorts_zeros() {
        let p = RapInstance::with_zeros(3, 3, 2, &[(2, 1), (0, 2), (0, 1)]).unwrap();
        assert_eq!(
            serialize_instance(&p),
            r#"{"m":3,"n":3,"k":2,"zeros":[[0,1],[0,2],[2,1]]}"#
        );
    }

    #[test]
    fn transpose_examples() {
        let p = RapInstance::with_zeros(2, 3, 2, &[(0, 2)]).unwrap();
        let t = p.transpose();
        assert_eq!((t.m(), t.n(), t.k()), (3, 2, 2));
        assert_eq!(t.zeros(), &[Position::new(2, 0)]);
        assert_eq!(t.transpose(), p);
        let sq = RapInstance::no_zeros(3, 3, 2).unwrap();
        assert_eq!(sq.transpose(), sq);
    }

    #[test]
    fn delete_column_examples() {
        let p = RapInstance::with_zeros(3, 3, 2, &[(0, 0), (1, 0)]).unwrap();
        let d = p.delete_column(0).unwrap();
        assert_eq!((d.m(), d.n(), d.k()), (3, 2, 1));
        assert!(d.zeros().is_empty());

        let p = RapInstance::with_zeros(2, 3, 2, &[(0, 2)]).unwrap();
        let d = p.delete_column(1).unwrap();
        assert_eq!((d.m(), d.n(), d.k()), (2, 2, 1));
        assert_eq!(d.zeros(), &[Position::new(0, 1)]);

        let p = RapInstance::no_zeros(2, 2, 2).unwrap();
        assert!(p.delete_column(0).is_err());
        let p = RapInstance::no_zeros(3, 3, 2).unwrap();
        assert!(matches!(
            p.delete_column(3),
            Err(RapError::IndexOutOfRange { .. })
        ));
        let p = RapInstance::no_zeros(3, 3, 1).unwrap();
        assert!(p.delete_column(0).is_err());
    }

    #[test]
    fn delete_row_mirrors_column() {
        let p = RapInstance::with_zeros(3, 2, 2, &[(0, 0), (2, 1)]).unwrap();
        let d = p.delete_row(0).unwrap();
        assert_eq!((d.m(), d.n(), d.k()), (2, 2, 1));
        assert_eq!(d.zeros(), &[Position::new(1, 1)]);
    }

    #[test]
    fn insert_zero_examples() {
        let p = RapInstance::no_zeros(2, 2, 2).unwrap();
        let q = p.insert_zero(Position::new(0, 0)).unwrap();
        assert_eq!(q.zeros(), &[Position::new(0, 0)]);
        assert_eq!(
            q.insert_zero(Position::new(0, 0)),
            Err(RapError::AlreadyZero(Position::new(0, 0)))
        );
        let p = RapInstance::with_zeros(3, 3, 2, &[(0, 0)]).unwrap();
        let q = p.insert_zero(Position::new(1, 1)).unwrap();
        assert_eq!(q.zeros(), &[Position::new(0, 0), Position::new(1, 1)]);
    }

    #[test]
    fn assignment_independence() {
        assert!(Assignment::new([(0, 0), (1, 1)]).is_ok());
        assert!(Assignment::new([(0, 0), (0, 1)]).is_err());
        assert!(Assignment::new([(0, 1), (1, 1)]).is_err());
        let a = Assignment::new([(0, 1)]).unwrap();
        assert!(uses_row(&a, 0));
        assert!(!uses_row(&a, 1));
    }

    #[test]
    fn sampled_matrix_contract() {
        let z = ZeroPattern::new(1, 2, [(0, 0)]).unwrap();
        assert!(SampledMatrix::new(z.clone(), vec![0.0, 0.5]).is_ok());
        assert!(SampledMatrix::new(z.clone(), vec![0.1, 0.5]).is_err());
        assert!(SampledMatrix::new(z, vec![0.0, 0.0]).is_err());
    }
}
