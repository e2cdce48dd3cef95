//! Error taxonomy for the command-line front end.
//!
//! Two buckets, matching the process exit codes: usage problems (bad flags,
//! unreadable or malformed inputs, impossible requests) exit with 2, and
//! numeric failures (a computation that ran but could not deliver, or a
//! checked claim that missed its tolerance) exit with 3. Success — including
//! rows whose failure is the documented expected outcome — exits with 0.

use std::fmt;

/// A command-line failure with its exit-code class.
#[derive(Debug)]
pub enum CliError {
    /// The invocation itself is wrong; nothing was computed. Exit code 2.
    Usage(String),
    /// The computation ran and failed numerically. Exit code 3.
    Numeric(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Numeric(msg) => write!(f, "numeric failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

/// Shorthand constructors so call sites stay one line.
pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn numeric(msg: impl Into<String>) -> CliError {
    CliError::Numeric(msg.into())
}
