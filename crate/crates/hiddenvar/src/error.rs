use std::path::Path;

use thiserror::Error;

/// Failure of a subcommand, split by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or unreadable input files.
    #[error("{0}")]
    Input(String),
    /// Outputs were written but a postcondition did not hold.
    #[error("{0}")]
    Postcondition(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Postcondition(_) => 1,
            Self::Input(_) => 2,
            Self::Io { .. } => 3,
        }
    }

    pub(crate) fn read(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn write(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn json(path: &Path, e: &serde_json::Error) -> Self {
        Self::Input(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    }

    pub(crate) fn at_line(path: &Path, line: u64, msg: impl std::fmt::Display) -> Self {
        Self::Input(format!("{}:{line}: {msg}", path.display()))
    }
}

impl From<hiddenvar_core::Error> for CliError {
    fn from(e: hiddenvar_core::Error) -> Self {
        Self::Input(e.to_string())
    }
}
