//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("invalid status at row {row}: {value} (expected 0 or 1)")]
    InvalidStatus { row: usize, value: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix: non-finite entry")]
    InvalidMatrix,

    #[error("degenerate weights: Kaplan-Meier mass is zero (all observations censored)")]
    DegenerateWeights,

    #[error("uninformative initial estimator: all coefficients are zero")]
    UninformativeInitial,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate fold: a fold contains no uncensored observation")]
    DegenerateFold,

    #[error("score undefined: {0}")]
    ScoreUndefined(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        /// Best iterate found, converted to f64.
        best: Vec<f64>,
    },

    #[error("bracketing failed: {0}")]
    BracketFailure(String),

    #[error("csv error at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
