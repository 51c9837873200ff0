use thiserror::Error;

use crate::model::Position;

/// Errors raised by instance construction and the exact/statistical routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RapError {
    #[error("malformed instance document: {0}")]
    Malformed(String),
    #[error("matrix dimensions must be positive, got {m}x{n}")]
    EmptyDimension { m: usize, n: usize },
    #[error("position ({row}, {col}) is outside the {m}x{n} matrix")]
    PositionOutOfRange {
        row: usize,
        col: usize,
        m: usize,
        n: usize,
    },
    #[error("duplicate zero position ({}, {})", .0.row, .0.col)]
    DuplicateZero(Position),
    #[error("k = {k} is outside 1..=min(m, n) = {max}")]
    InvalidK { k: usize, max: usize },
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("position ({}, {}) is already a zero", .0.row, .0.col)]
    AlreadyZero(Position),
    #[error("position ({}, {}) is a zero", .0.row, .0.col)]
    ZeroPosition(Position),
    #[error("row {0} contains a zero")]
    RowHasZero(usize),
    #[error("matrix entry at ({row}, {col}) is not a finite nonnegative number")]
    BadEntry { row: usize, col: usize },
    #[error(
        "instance too large for exhaustive enumeration ({count} candidate sets, limit {limit})"
    )]
    TooLarge { count: u128, limit: u128 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("oracle budget exhausted after {nodes} nodes")]
    BudgetExhausted { nodes: u64 },
    #[error("oracle invariant violated: {0}")]
    OracleInvariant(String),
}

pub type Result<T, E = RapError> = std::result::Result<T, E>;
