use std::fmt;
use std::path::Path;

use gatefloor::Error;

/// A failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// A verification check did not hold.
    Verification(String),
    /// The gate input is unknown or not unitary.
    InvalidGate(String),
    /// A malformed argument or input file.
    Malformed(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::InvalidGate(_) => 2,
            CliError::Malformed(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    /// Library errors raised while building or checking a gate.
    pub fn gate(err: Error) -> Self {
        match err {
            Error::Malformed(m) => CliError::Malformed(m),
            other => CliError::InvalidGate(other.to_string()),
        }
    }
}

/// Library errors outside gate input are argument problems.
impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Malformed(err.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::InvalidGate(m) => write!(f, "invalid gate: {m}"),
            CliError::Malformed(m) => write!(f, "malformed input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
