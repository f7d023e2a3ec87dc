use thiserror::Error;

use crate::qcore::MAX_DIM;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("dimension {0} is outside the supported range 2..={MAX_DIM}")]
    DimensionCap(usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not a valid channel: {0}")]
    InvalidChannel(String),
    #[error("Kraus operators are not trace preserving (residual {0:.3e})")]
    NotTracePreserving(f64),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("infeasible problem: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("sampler mismatch: {0}")]
    SamplerMismatch(String),
    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
