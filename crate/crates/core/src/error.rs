use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed tree or mechanism input. `index` names the offending vertex
    /// or entry when there is one.
    #[error("validation error{}: {reason}", index.map(|i| format!(" at index {i}")).unwrap_or_default())]
    Validation {
        index: Option<usize>,
        reason: String,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("singularity: {0}")]
    Singularity(String),

    /// Conditioning could not be met within the rejection budget.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("calibration unstable: relative stderr {rel_stderr:.4} exceeds {limit}")]
    CalibrationUnstable { rel_stderr: f64, limit: f64 },

    /// Two distinct classes share a record value. This has probability zero
    /// under continuous marks and points at RNG misuse.
    #[error("record tie between distinct classes at theta = {0}")]
    TieAlarm(f64),

    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("root find failed: {0}")]
    NoConvergence(String),
}

impl Error {
    pub(crate) fn validation(index: impl Into<Option<usize>>, reason: impl Into<String>) -> Self {
        Error::Validation {
            index: index.into(),
            reason: reason.into(),
        }
    }
}
