use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("evaluation at a singularity (x = {x})")]
    Singularity { x: f64 },

    #[error("accuracy not reached: requested {requested:e}, achieved {achieved:e}")]
    Accuracy { requested: f64, achieved: f64 },

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("modulation schedule too small at level {level}: |low| = {low} >= |high| = {high}")]
    ScheduleTooSmall { level: isize, low: i128, high: i128 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
