//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {state} of action {action} sums to {sum} (must be 1 within {tol})")]
    RowSum {
        action: usize,
        state: usize,
        sum: f64,
        tol: f64,
    },

    #[error("negative probability {value} at (state {state}, action {action}, next {next_state})")]
    NegativeProbability {
        action: usize,
        state: usize,
        next_state: usize,
        value: f64,
    },

    #[error("discount factor {0} outside the open interval (0, 1)")]
    GammaOutOfRange(f64),

    #[error("{what} index {index} out of range (< {bound} required)")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("duplicate transition entry at (state {state}, action {action}, next {next_state})")]
    DuplicateEntry {
        action: usize,
        state: usize,
        next_state: usize,
    },

    #[error("duplicate column {col} in row {row}")]
    DuplicateColumn { row: usize, col: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("factorization failure: {0}")]
    FactorizationFailure(String),

    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("matrix is not irreducible")]
    NotIrreducible,

    #[error("eigensolve failure: {0}")]
    EigensolveFailure(String),

    #[error("{what} too large: {size} exceeds the guard {max}")]
    TooLarge {
        what: &'static str,
        size: u128,
        max: u128,
    },

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("malformed model file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
