use thiserror::Error;

use crate::mode::AgentMode;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("transition {from:?} -> {to:?} is not part of the agent state machine")]
    Transition { from: AgentMode, to: AgentMode },

    #[error("non-finite state at integration step {step}")]
    NonFinite { step: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A closed-form result fell outside its admissible range.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("eigenvalue and Routh-Hurwitz stability tests disagree: {0}")]
    StabilityDisagreement(String),

    #[error("input error at row {row}: {reason}")]
    Input { row: usize, reason: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }
}
