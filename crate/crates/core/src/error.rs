use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Sign of `u + v·α` could not be resolved from the supplied digits of α.
    #[error("comparison undecided at {digits} digits of alpha; supply more digits")]
    InsufficientPrecision { digits: usize },

    #[error("not an indicator function: value {value} on cell [{lo}, {hi})")]
    NotIndicator { lo: String, hi: String, value: String },

    #[error("value not representable in Q + Z·alpha: {0}")]
    NotRepresentable(String),

    #[error("duplicate node {0}: Gram matrix singular by construction")]
    DuplicateNode(String),

    #[error("window too small: {0}")]
    InsufficientWindow(String),

    #[error("eigen-solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("conjugate gradients stagnated at relative residual {residual:e} (condition estimate {condition:e})")]
    Stagnation { residual: f64, condition: f64 },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
