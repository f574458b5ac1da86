use std::fmt;

use gaussopt_core::Error;

/// Exit codes: 2 is reserved for usage errors reported by clap.
pub const EXIT_VALIDATION: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    /// Missing or unreadable model file.
    Model(Error),
    Core(Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Model(_) => EXIT_VALIDATION,
            CliError::Core(e) => match e {
                Error::InvalidArgument(_) | Error::Io { .. } | Error::Format { .. } => {
                    EXIT_VALIDATION
                }
                Error::DivideByZero(_) | Error::DegenerateData(_) | Error::OutOfDomain(_) => {
                    EXIT_NUMERIC
                }
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::Model(e) => write!(f, "cannot load model file: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}
