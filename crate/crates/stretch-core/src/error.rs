//! Crate-wide error type.

use crate::model::{JobId, Policy, ValidationReport};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("instance has no jobs")]
    EmptyInstance,

    #[error("duplicate job id {0}")]
    DuplicateJobId(JobId),

    #[error("job {0}: processing time must be positive")]
    NonPositiveProcessing(JobId),

    #[error("job {0}: release time must be nonnegative")]
    NegativeRelease(JobId),

    #[error("machine count must be at least 1")]
    NoMachines,

    #[error("{what} needs a single-machine instance, this one has {machines}")]
    NeedsSingleMachine { what: &'static str, machines: u32 },

    #[error("expected a schedule produced by {expected}, got one produced by {actual}")]
    WrongPolicy { expected: Policy, actual: Policy },

    #[error("inputs were built from different instances")]
    InstanceMismatch,

    #[error("schedule fails validation: {0}")]
    InvalidSchedule(ValidationReport),

    #[error("active intervals of jobs {a} and {b} overlap without nesting")]
    LaminarityViolation { a: JobId, b: JobId },

    #[error("forest does not describe the given schedule")]
    ForestMismatch,

    #[error("oracle limit: {explored} nodes explored, budget is {budget}")]
    OracleLimit { explored: u64, budget: u64 },

    #[error("ratio bound needs delta >= 1, got {0}")]
    DeltaBelowOne(Rational),

    #[error("processing times must be positive")]
    NonPositiveProcessingInput,

    #[error("unknown adversarial family {0:?}")]
    UnknownFamily(String),

    #[error("{0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
