use std::path::PathBuf;

/// Errors produced by the smoothing, metric and fitting routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A ratio whose denominator power is exactly zero, e.g. the SNR of a
    /// noiseless input or of a perfect reconstruction.
    #[error("division by zero: {0}")]
    DivideByZero(&'static str),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// A closed-form prediction left the region where the fitted model is valid.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what} in {path}: {message}")]
    Format {
        what: &'static str,
        path: PathBuf,
        message: String,
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

    pub(crate) fn format(
        what: &'static str,
        path: impl Into<PathBuf>,
        message: impl ToString,
    ) -> Self {
        Error::Format {
            what,
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
