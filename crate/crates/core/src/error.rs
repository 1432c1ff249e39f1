//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any operation in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Two points (or a point and an index) disagree on dimensionality.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A parameter violated its documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A bit flip was requested but the two points agree nowhere.
    #[error("no agreement coordinates")]
    NoAgreementBits,

    /// A midpoint was requested between points at Hamming distance < 2.
    #[error("already adjacent")]
    AlreadyAdjacent,

    /// A dataset violated a structural invariant (emptiness, ragged rows, ...).
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    /// A data or config file failed to parse; `line` is 1-based.
    #[error("line {line}: {message}")]
    DataFormat { line: usize, message: String },

    /// An experiment configuration was structurally invalid.
    #[error("invalid config: {0}")]
    Config(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
