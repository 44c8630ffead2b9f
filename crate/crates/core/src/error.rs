//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by any operation in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The remote embedding provider could not be reached after retries,
    /// or rejected the request outright.
    #[error("embedding provider unavailable: {0}")]
    ProviderUnavailable(String),

    /// The provider answered but broke its contract (wrong dimension,
    /// missing indices, malformed payload).
    #[error("embedding provider contract violation: {0}")]
    ProviderContractViolation(String),

    /// A cache record could not be decoded; the caller should recompute.
    #[error("corrupt cache record: {0}")]
    CacheCorrupt(String),

    /// An attempt to overwrite a cached vector with different data.
    #[error("cache conflict: {0}")]
    CacheConflict(String),

    /// A classification-head operation was invoked on a regression model
    /// or vice versa.
    #[error("wrong model head: {0}")]
    WrongHead(String),

    /// Training produced a non-finite loss.
    #[error("training diverged: {0}")]
    TrainingDiverged(String),

    /// Calibration labels contain only one class.
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    /// A statistic is undefined on the given input (e.g. constant sequence).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Agreement data admits no chance disagreement (expected disagreement
    /// is zero).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Not enough pairable values to compute agreement.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Too few distinct prompt ids to honor the requested split fractions.
    #[error("insufficient prompts: {0}")]
    InsufficientPrompts(String),

    /// The bootstrapped statistic failed on more than half of the resamples.
    #[error("unstable statistic: {0}")]
    UnstableStatistic(String),

    /// Filesystem failure while reading or writing artifact files.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
