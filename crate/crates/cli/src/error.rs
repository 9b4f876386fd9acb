use std::path::PathBuf;

use invcore::io::FormatError;
use invcore::{EnumerationError, Error, MiningError, RolloutError};

pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;
pub const EXIT_GUARD: i32 = 5;
pub const EXIT_INTERNAL: i32 = 6;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Rollout(#[from] RolloutError),
    #[error("internal check failed: {0}")]
    Internal(String),
}

impl From<EnumerationError> for CliError {
    fn from(e: EnumerationError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<MiningError> for CliError {
    fn from(e: MiningError) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Format { source: FormatError::Validation(_), .. } => EXIT_VALIDATION,
            CliError::Format { .. } => EXIT_PARSE,
            CliError::Core(Error::Enumeration(_))
            | CliError::Core(Error::Mining(MiningError::BudgetExceeded { .. } | MiningError::OracleScale { .. })) => {
                EXIT_GUARD
            }
            CliError::Core(_) | CliError::Rollout(_) => EXIT_VALIDATION,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}
