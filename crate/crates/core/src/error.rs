use alloc::string::String;

use crate::model::Loss;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid penalty graph: {0}")]
    InvalidGraph(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error("column {0} of the design matrix has zero norm")]
    ZeroColumn(usize),
    #[error("partition inconsistent with coefficients: {0}")]
    InconsistentPartition(String),
    #[error("invalid fused sets: {0}")]
    InvalidFusedSets(String),
    #[error("set {set} has mixed signs for a {mode} split")]
    SplitPrecondition { set: usize, mode: &'static str },
    #[error("tied event times at observations {0} and {1}")]
    TiedTimes(usize, usize),
    #[error("survival data contains no events")]
    NoEvents,
    #[error("{0:?} loss is not supported by this operation")]
    UnsupportedLoss(Loss),
    #[error("the compared paths have no solved cell in common")]
    EmptyComparison,
    #[error("degenerate grid: {0}")]
    DegenerateGrid(&'static str),
}
