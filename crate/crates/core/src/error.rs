use thiserror::Error;

use crate::grid::DyadicCube;

/// Errors raised by the grid, weight, bump and sparse machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cube {cube}: {reason}")]
    InvalidCube { cube: DyadicCube, reason: String },

    #[error("resolution mismatch: {left} vs {right}")]
    ResolutionMismatch { left: u32, right: u32 },

    #[error("invalid grid function: {0}")]
    InvalidGrid(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse `{spec}`: {reason}")]
    InvalidSpec { spec: String, reason: String },

    #[error("orlicz norm: {0}")]
    Orlicz(String),

    #[error("missing coefficient for cube {0}")]
    MissingCoefficient(DyadicCube),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
