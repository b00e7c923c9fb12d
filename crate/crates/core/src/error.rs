use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum EqError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain violation: {0}")]
    DomainViolation(String),

    /// The truncated basis cannot hold the requested state.
    #[error("capacity exceeded: {message} (need dim >= {required_dim})")]
    Capacity {
        message: String,
        required_dim: usize,
    },

    #[error("numerical failure: {message}; diagnostics: {diagnostics:?}")]
    NumericalFailure {
        message: String,
        diagnostics: Vec<f64>,
    },

    #[error("invalid transform: {0}")]
    InvalidTransform(String),

    #[error("config error at {field}: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, EqError>;

impl EqError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        EqError::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        EqError::DomainViolation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, diagnostics: Vec<f64>) -> Self {
        EqError::NumericalFailure {
            message: msg.into(),
            diagnostics,
        }
    }

    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        EqError::Config {
            field: field.into(),
            message: msg.into(),
        }
    }
}
