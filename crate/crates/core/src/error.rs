use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum FspcaError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("symmetric eigensolver did not converge within {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("brute force over C({d}, {k}) = {count} supports exceeds the cap of {cap}")]
    CombinatorialCap {
        d: usize,
        k: usize,
        count: u128,
        cap: u128,
    },

    #[error("solver objective {objective} exceeds oracle optimum {optimum}")]
    OracleViolation { objective: f64, optimum: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FspcaError>;
