use thiserror::Error;

/// Exit code for verification failures and solver non-convergence.
pub const EXIT_FAILURE: i32 = 1;
/// Exit code for malformed input.
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Math(#[from] lagpolar::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => EXIT_FAILURE,
            CliError::Math(lagpolar::Error::NoConvergence { .. }) => EXIT_FAILURE,
            _ => EXIT_INPUT,
        }
    }
}
