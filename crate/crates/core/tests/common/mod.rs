//! Test-only oracles, independent of the library's cover and solver code.

#![allow(dead_code)]

use rand::Rng;
use rap_core::model::{Position, RapInstance, ZeroPattern};
use rap_core::solver::CostMatrix;
use rap_core::RationalValue;

/// Per-row bitmask of zero columns.
pub fn row_masks(z: &ZeroPattern) -> Vec<u32> {
    let mut masks = vec![0u32; z.rows()];
    for p in z.zeros() {
        masks[p.row] |= 1 << p.col;
    }
    masks
}

pub fn is_cover(masks: &[u32], rows: u32, cols: u32) -> bool {
    masks
        .iter()
        .enumerate()
        .all(|(r, &zr)| rows >> r & 1 == 1 || zr & !cols == 0)
}

/// Every `(row set, col set)` cover of minimum size, by exhaustive search.
pub fn optimal_covers(z: &ZeroPattern) -> (usize, Vec<(u32, u32)>) {
    let masks = row_masks(z);
    let (m, n) = (z.rows(), z.cols());
    let mut best = usize::MAX;
    let mut out = Vec::new();
    for rows in 0..1u32 << m {
        for cols in 0..1u32 << n {
            if !is_cover(&masks, rows, cols) {
                continue;
            }
            let size = (rows.count_ones() + cols.count_ones()) as usize;
            if size < best {
                best = size;
                out.clear();
            }
            if size == best {
                out.push((rows, cols));
            }
        }
    }
    (best, out)
}

/// Largest independent zero set by exhaustive search over subsets of zeros.
pub fn brute_max_independent(z: &ZeroPattern) -> usize {
    let zeros = z.zeros();
    let mut best = 0;
    for mask in 0..1u32 << zeros.len() {
        let (mut rows, mut cols, mut ok) = (0u32, 0u32, true);
        for (i, p) in zeros.iter().enumerate() {
            if mask >> i & 1 == 1 {
                if rows >> p.row & 1 == 1 || cols >> p.col & 1 == 1 {
                    ok = false;
                    break;
                }
                rows |= 1 << p.row;
                cols |= 1 << p.col;
            }
        }
        if ok {
            best = best.max(mask.count_ones() as usize);
        }
    }
    best
}

/// Number of partial (k-1)-covers with `i` rows and `j` columns that avoid
/// row `excluded` (if any): subsets of an exact (k-1)-line cover, found by
/// enumerating all (k-1)-covers directly.
pub fn brute_partial_count(p: &RapInstance, i: usize, j: usize, excluded: Option<usize>) -> u64 {
    let (m, n, k) = (p.m(), p.n(), p.k());
    let masks = row_masks(p.pattern());
    let mut covers = Vec::new();
    for rows in 0..1u32 << m {
        for cols in 0..1u32 << n {
            if (rows.count_ones() + cols.count_ones()) as usize == k - 1
                && is_cover(&masks, rows, cols)
            {
                covers.push((rows, cols));
            }
        }
    }
    let mut count = 0;
    for rows in 0..1u32 << m {
        if rows.count_ones() as usize != i || excluded.is_some_and(|r| rows >> r & 1 == 1) {
            continue;
        }
        for cols in 0..1u32 << n {
            if cols.count_ones() as usize != j {
                continue;
            }
            if covers
                .iter()
                .any(|&(cr, cc)| rows & !cr == 0 && cols & !cc == 0)
            {
                count += 1;
            }
        }
    }
    count
}

pub fn random_pattern<R: Rng>(rng: &mut R, m: usize, n: usize, density: f64) -> ZeroPattern {
    let zeros: Vec<Position> = (0..m)
        .flat_map(|r| (0..n).map(move |c| Position::new(r, c)))
        .filter(|_| rng.random::<f64>() < density)
        .collect();
    ZeroPattern::new(m, n, zeros).unwrap()
}

pub fn random_instance<R: Rng>(rng: &mut R, max_dim: usize, density: f64) -> RapInstance {
    let m = rng.random_range(1..=max_dim);
    let n = rng.random_range(1..=max_dim);
    let k = rng.random_range(1..=m.min(n));
    RapInstance::new(random_pattern(rng, m, n, density), k).unwrap()
}

/// Zeros on the pattern, distinct large random integers elsewhere, so that
/// sums of distinct nonzero sets almost never collide.
pub fn generic_matrix<R: Rng>(rng: &mut R, z: &ZeroPattern) -> CostMatrix<RationalValue> {
    let mut entries = Vec::new();
    for r in 0..z.rows() {
        for c in 0..z.cols() {
            if z.is_zero(Position::new(r, c)) {
                entries.push(RationalValue::zero());
            } else {
                entries.push(RationalValue::from(rng.random_range(1..1_000_000_000i64)));
            }
        }
    }
    CostMatrix::from_vec(z.rows(), z.cols(), entries).unwrap()
}
