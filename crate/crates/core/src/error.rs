use thiserror::Error;

use crate::support::SupportPair;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(
        "growth stuck at size {} of {target} after {trials} direction trials",
        best.len()
    )]
    Stuck {
        best: SupportPair,
        best_certificate: Vec<f64>,
        target: usize,
        trials: usize,
    },

    #[error("enumeration of {pairs} pairs for n = {n} exceeds the guard n <= {guard}; pass the override to proceed")]
    GuardExceeded { n: usize, guard: usize, pairs: u128 },

    #[error("quadrature did not converge: achieved relative error {achieved:e}")]
    Quadrature { achieved: f64 },

    #[error("data error: {0}")]
    Data(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
