use thiserror::Error;

/// Errors raised by the estimators, optimizers and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible plan: {0}")]
    Infeasible(String),

    #[error("non-finite sample at level {level}, outer index {index}")]
    NonFinite { level: usize, index: u64 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("inner sampler failed: {0}")]
    Sampler(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidInput(_) | Error::Serialization(_) => 2,
            Error::Infeasible(_) => 3,
            Error::NonFinite { .. }
            | Error::Overflow(_)
            | Error::Numerical(_)
            | Error::Sampler(_) => 4,
            Error::Io(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
