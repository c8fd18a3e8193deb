use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Solver(#[from] kext_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0} check(s) failed")]
    Validation(usize),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad input, 3 for solver or I/O failures, 1 for failed checks.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Solver(_) | CliError::Io { .. } => 3,
            CliError::Validation(_) => 1,
        }
    }
}

/// Reclassifies a library error raised while interpreting user input.
pub(crate) fn invalid_input(err: kext_core::Error) -> CliError {
    CliError::Usage(err.to_string())
}
