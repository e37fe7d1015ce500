use std::fmt;
use std::path::PathBuf;

use gigo::GigoError;

/// Failure of a subcommand, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags, config file contents or parameter values (exit 1).
    Config(String),
    /// Reading the config or writing the output failed (exit 2).
    Io { path: PathBuf, source: std::io::Error },
    /// Some `verify` checks did not pass (exit 1).
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::ChecksFailed { .. } => 1,
            CliError::Io { .. } => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::ChecksFailed { failed, total } => write!(f, "{failed} of {total} checks failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<GigoError> for CliError {
    fn from(e: GigoError) -> Self {
        CliError::Config(e.to_string())
    }
}
