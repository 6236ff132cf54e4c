use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// An iterative method ran out of budget. `residuals` holds the best
    /// residual reached for each requested quantity.
    #[error("numerical failure: {message} (best residuals {residuals:?})")]
    NumericalFailure { message: String, residuals: Vec<f64> },

    /// A groundstate changed sign, which only happens on disconnected masks.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
