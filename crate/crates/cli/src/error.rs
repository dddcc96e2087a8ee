use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}:{column}: {message}")]
    ConfigSyntax {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown parameter `{path}`; valid paths are:\n  {}", valid.join("\n  "))]
    UnknownPath { path: String, valid: Vec<String> },

    #[error("malformed override `{0}`, expected KEY=VALUE")]
    MalformedOverride(String),

    #[error("sweep needs at least one value")]
    EmptySweep,

    #[error("{path}:{line}: {message}")]
    LogRecord {
        path: String,
        line: usize,
        message: String,
    },

    #[error("simulation aborted: {0}")]
    Sim(#[from] quadsar_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Configuration problems exit with 2, everything else with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigSyntax { .. }
            | Error::Config(_)
            | Error::UnknownPath { .. }
            | Error::MalformedOverride(_)
            | Error::EmptySweep
            | Error::Sim(quadsar_core::Error::InvalidConfig(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
