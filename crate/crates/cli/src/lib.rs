//! Command-line front end for the `qincompat` toolkit.

pub mod commands;
pub mod device_file;
pub mod record;
pub mod reproduce;

use std::fmt;

/// Exit code of a verdict-free success or a FEASIBLE verdict.
pub const EXIT_FEASIBLE: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
/// UNDECIDED verdicts and runtime failures.
pub const EXIT_UNDECIDED: i32 = 2;
/// Usage errors and malformed input.
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_UNDECIDED,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<qincompat::Error> for CliError {
    fn from(e: qincompat::Error) -> Self {
        use qincompat::Error as E;
        match e {
            E::DimensionMismatch(_) | E::InvalidDevice { .. } | E::InvalidArgument(_) | E::CapExceeded { .. } => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<device_file::ParseError> for CliError {
    fn from(e: device_file::ParseError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
