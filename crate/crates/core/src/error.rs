use thiserror::Error;

use crate::vector::SparseVector;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
    #[error("insufficient data: need at least {needed} terms, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("operators do not commute on probe {probe:?}")]
    NonCommuting { probe: SparseVector },
    #[error("lambda must be nonzero")]
    ZeroLambda,
    #[error("no closed form: {0}")]
    NoClosedForm(String),
    #[error("precondition failed on kernel probe {probe:?}: {reason}")]
    PreconditionFailed { probe: SparseVector, reason: String },
    #[error("lambda lies in the closure of the diagonal values (distance {distance})")]
    SpectrumLambda { distance: f64 },
    #[error("no cover found within {cap} arcs")]
    NoCover { cap: usize },
    #[error("hierarchy violation: {0}")]
    Hierarchy(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, SpectraError>;
