use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum L0Error {
    #[error("atom probability must be strictly positive, got {0}")]
    NonPositiveProb(String),
    #[error("atom probabilities sum to {0}, not 1")]
    ProbSumNotOne(String),
    #[error("atom index {index} is not valid on this space")]
    InvalidAtomIndex { index: usize },
    #[error("operands live on different probability spaces")]
    SpaceMismatch,
    #[error("(+inf) + (-inf) is undefined")]
    UndefinedExtendedArith,
    #[error("result is not eventually constant and cannot be represented: {0}")]
    NotRepresentable(String),
    #[error("partition and pieces do not match: {0}")]
    PartitionMismatch(String),
    #[error("events do not form a partition: {0}")]
    NotAPartition(String),
    #[error("value must be strictly positive on every atom: {0}")]
    NotStrictlyPositive(String),
    #[error("value must be finite on every atom: {0}")]
    NotFinite(String),
    #[error("engine does not support this query: {0}")]
    EngineUnsupported(String),
    #[error("no absorbing scalar exists for this element")]
    NotAbsorbedHere,
    #[error("prerequisite failed: {0}")]
    PrerequisiteFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
}
