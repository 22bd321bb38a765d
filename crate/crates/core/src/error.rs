use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the engine.
#[derive(Debug, Error)]
pub enum BqmError {
    #[error("shape mismatch: expected dimension {expected}, got {found}")]
    Shape { expected: usize, found: usize },

    /// A precondition of an operation was violated by its inputs.
    #[error("contract violated: {0}")]
    Contract(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The Hamiltonian values at two sampled times fail to commute.
    #[error("hamiltonian family is not flat: ||[H({s}), H({t})]|| = {norm:e}")]
    NotFlat { s: f64, t: f64, norm: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config at `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl BqmError {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        BqmError::Contract(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        BqmError::Numeric(msg.into())
    }

    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        BqmError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Prefix the message of contract and numeric errors with some context.
    pub fn with_context(self, ctx: &str) -> Self {
        match self {
            BqmError::Contract(m) => BqmError::Contract(format!("{ctx}: {m}")),
            BqmError::Numeric(m) => BqmError::Numeric(format!("{ctx}: {m}")),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, BqmError>;
