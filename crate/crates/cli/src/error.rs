use std::fmt;

use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const UNDECIDED: u8 = 1;
    pub const INVALID: u8 = 2;
    pub const GOLDEN_MISMATCH: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{}: {error}", Located(path, *line))]
    Problem {
        path: String,
        line: Option<usize>,
        error: hammerstein_core::Error,
    },

    #[error(transparent)]
    Core(#[from] hammerstein_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Io(String),

    #[error("golden mismatch: {}", .0.join("; "))]
    GoldenMismatch(Vec<String>),
}

struct Located<'a>(&'a str, Option<usize>);

impl fmt::Display for Located<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.1 {
            Some(line) => write!(f, "{}:{line}", self.0),
            None => f.write_str(self.0),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::GoldenMismatch(_) => exit::GOLDEN_MISMATCH,
            _ => exit::INVALID,
        }
    }
}
