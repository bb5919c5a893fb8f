use thiserror::Error;

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for internal errors and failed verification.
pub const EXIT_INTERNAL: i32 = 1;
/// Exit status for infeasible or invalid experiments.
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] randcover::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use randcover::Error as E;
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Core(E::StreamExhausted(_)) => EXIT_INTERNAL,
            CliError::Core(_) => EXIT_INVALID,
            CliError::Io(_) | CliError::Verification(_) => EXIT_INTERNAL,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}
