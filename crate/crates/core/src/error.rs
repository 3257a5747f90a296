use std::io;

use thiserror::Error;

/// Errors produced by the QPP core library.
#[derive(Debug, Error)]
pub enum QppError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("keystream value {value} at position {position} is outside [{low}, {high}]")]
    KeystreamOutOfRange {
        position: usize,
        value: u64,
        low: u64,
        high: u64,
    },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} is infeasible: {guidance}")]
    Infeasible { what: String, guidance: String },

    #[error("key mismatch: {0}")]
    KeyMismatch(String),

    #[error("corrupt input: {0}")]
    Corrupt(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("entropy source failure: {0}")]
    Entropy(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = QppError> = std::result::Result<T, E>;
