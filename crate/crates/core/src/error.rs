use thiserror::Error;

use crate::numeric::ParseNumberError;

/// Errors raised by the library. Negative answers (infeasible LPs,
/// unrealizable SOAPs) are results, not errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Parse(#[from] ParseNumberError),

    /// Problem in an input document, located by a JSON path such as `transitions[2].to`.
    #[error("{path}: {message}")]
    Input { path: String, message: String },

    #[error("invalid environment: {0}")]
    InvalidEnv(String),

    #[error("invalid policy {name:?}: {reason}")]
    InvalidPolicy { name: String, reason: String },

    #[error("enumeration refused: {count} deterministic policies exceed the limit of {limit}")]
    LimitExceeded { count: u128, limit: u128 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("SOAP is inconsistent: {} good/bad pair(s) share a visitation vector", .witnesses.len())]
    Inconsistent { witnesses: Vec<(String, String)> },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
