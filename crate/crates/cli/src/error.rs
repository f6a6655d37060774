use std::fmt;
use std::path::PathBuf;

use torelli_core::Error;

#[derive(Debug)]
pub enum CliError {
    /// Invalid arguments or configuration; exit code 2.
    Usage(String),
    /// A pipeline or I/O failure; exit code 1.
    Compute(Error),
    Io { path: PathBuf, source: std::io::Error },
    /// The command ran but its checks did not pass; exit code 1.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(Error::Stage { stage, source }) => write!(f, "error[{stage}]: {source}"),
            CliError::Compute(e) => write!(f, "error: {e}"),
            CliError::Io { path, source } => write!(f, "error: {}: {source}", path.display()),
            CliError::Failed(m) => write!(f, "failed: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Compute(Error::Json(e))
    }
}
