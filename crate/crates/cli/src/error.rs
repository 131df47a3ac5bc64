use std::fmt;
use std::path::Path;

use trsat_core::generators::GenError;
use trsat_core::training::{DatasetError, TrainError};
use trsat_core::{DimacsError, ModelError, OracleError};

/// Error classes, each with its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    MissingFile,
    Io,
    Parse,
    CapExceeded,
    Config,
    Runtime,
    Soundness,
}

impl ErrorKind {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Usage => 2,
            ErrorKind::MissingFile => 3,
            ErrorKind::Io => 4,
            ErrorKind::Parse => 5,
            ErrorKind::CapExceeded => 6,
            ErrorKind::Config => 7,
            ErrorKind::Runtime => 8,
            ErrorKind::Soundness => 9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Usage => "usage",
            ErrorKind::MissingFile => "missing_file",
            ErrorKind::Io => "io",
            ErrorKind::Parse => "parse",
            ErrorKind::CapExceeded => "cap_exceeded",
            ErrorKind::Config => "config",
            ErrorKind::Runtime => "runtime",
            ErrorKind::Soundness => "soundness",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        CliError { kind, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError::new(ErrorKind::Config, message)
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        let kind = if e.kind() == std::io::ErrorKind::NotFound { ErrorKind::MissingFile } else { ErrorKind::Io };
        CliError::new(kind, format!("{}: {e}", path.display()))
    }

    /// One JSON object on a single line.
    pub fn json_line(&self) -> String {
        serde_json::json!({
            "error": self.kind.name(),
            "code": self.kind.exit_code(),
            "message": self.message,
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.name(), self.message)
    }
}

impl From<DimacsError> for CliError {
    fn from(e: DimacsError) -> Self {
        CliError::new(ErrorKind::Parse, e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::new(ErrorKind::CapExceeded, e.to_string())
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        let kind = if matches!(e, GenError::NetlistSyntax { .. }) { ErrorKind::Parse } else { ErrorKind::Config };
        CliError::new(kind, e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        let kind = match e {
            ModelError::InvalidConfig(_) | ModelError::BadEpsilon(_) => ErrorKind::Config,
            ModelError::Checkpoint(_) | ModelError::CheckpointVersion { .. } => ErrorKind::Parse,
            ModelError::Io(ref io) if io.kind() == std::io::ErrorKind::NotFound => ErrorKind::MissingFile,
            ModelError::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Runtime,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Model(m) => m.into(),
            TrainError::InvalidConfig(_) | TrainError::EmptyDataset => CliError::config(e.to_string()),
            TrainError::Io(io) => CliError::new(ErrorKind::Io, io.to_string()),
            _ => CliError::new(ErrorKind::Runtime, e.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { ref source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                CliError::new(ErrorKind::MissingFile, e.to_string())
            }
            DatasetError::Io { .. } => CliError::new(ErrorKind::Io, e.to_string()),
            DatasetError::Parse { .. } => CliError::new(ErrorKind::Parse, e.to_string()),
            DatasetError::Empty(_) => CliError::config(e.to_string()),
        }
    }
}

impl From<trsat_core::solver::SolveError> for CliError {
    fn from(e: trsat_core::solver::SolveError) -> Self {
        match e {
            trsat_core::solver::SolveError::Model(m) => m.into(),
            other => CliError::new(ErrorKind::Runtime, other.to_string()),
        }
    }
}
