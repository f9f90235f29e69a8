use suspension_lab::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{flag}: {message}")]
    Usage { flag: String, message: String },

    #[error(transparent)]
    Lib(#[from] Error),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn usage(flag: &str, message: impl Into<String>) -> Self {
        CliError::Usage { flag: flag.to_string(), message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage { .. } | CliError::Io(_) => 2,
            CliError::Lib(e) if is_limit(e) => 3,
            CliError::Lib(_) => 2,
        }
    }
}

/// Caps, truncations and size limits, as opposed to bad input.
fn is_limit(e: &Error) -> bool {
    e.is_cap_or_truncation()
        || matches!(e, Error::EnumerationTooLarge { .. } | Error::LevelTooLarge { .. } | Error::OutOfRange(_))
}

/// Attributes input errors to the flag that carried the input; limit errors
/// pass through untouched.
pub fn at_flag<T>(flag: &str, r: Result<T, Error>) -> Result<T, CliError> {
    r.map_err(|e| if is_limit(&e) { CliError::Lib(e) } else { CliError::usage(flag, e.to_string()) })
}
