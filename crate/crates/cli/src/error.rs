//! CLI error classification. Exit codes: 0 success, 1 validation or usage,
//! 2 runtime or I/O, 3 selftest failure.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config, invalid parameters: exit 1.
    Usage(String),
    /// Filesystem or other runtime failure: exit 2.
    Io(String),
    /// The selftest battery found a failing check: exit 3.
    SelftestFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::SelftestFailed(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
            CliError::SelftestFailed(n) => write!(f, "selftest: {n} check(s) failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<lcsfluct_core::Error> for CliError {
    fn from(e: lcsfluct_core::Error) -> Self {
        // every core error reports an invalid input or an unattainable
        // request, which is a validation failure from the CLI's view
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn io_err(msg: impl Into<String>) -> CliError {
    CliError::Io(msg.into())
}
