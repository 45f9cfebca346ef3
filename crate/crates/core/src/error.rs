use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A combination of options that the simulator does not support.
    #[error("configuration error: {0}")]
    Config(String),

    /// An internal consistency check failed.
    #[error("internal error: {0}")]
    Internal(String),

    /// A batch stopped before all experiments completed.
    #[error("batch stopped after {completed_h0} H0 and {completed_h1} H1 experiments: {reason}")]
    Partial {
        completed_h0: u64,
        completed_h1: u64,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
