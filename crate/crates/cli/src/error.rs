use std::io;
use std::path::{Path, PathBuf};

use wheelprobe_core::probe::{FitError, ProbeError};
use wheelprobe_core::traverse::TraverseError;
use wheelprobe_core::vision::{PipelineError, VisionError};
use wheelprobe_core::SoilError;

/// Process exit status for each failure class.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const CONFIG: u8 = 2;
    pub const IO: u8 = 3;
    pub const DETECTION: u8 = 4;
    pub const INFEASIBLE: u8 = 5;
    pub const VERIFICATION_FAILED: u8 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    /// A file that exists but cannot be parsed.
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
    #[error("{}: detection failed: {source}", path.display())]
    Detection {
        path: PathBuf,
        #[source]
        source: PipelineError,
    },
    #[error("{failures} of {images} detections failed, first {first}")]
    BatchDetection {
        failures: usize,
        images: usize,
        first: String,
    },
    #[error("{0}")]
    Infeasible(TraverseError),
    #[error("verification failed: driven values fall outside the predicted band")]
    VerificationFailed,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io { .. } | CliError::Format { .. } => exit::IO,
            CliError::Detection { .. } | CliError::BatchDetection { .. } => exit::DETECTION,
            CliError::Infeasible(_) => exit::INFEASIBLE,
            CliError::VerificationFailed => exit::VERIFICATION_FAILED,
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn format(path: &Path, msg: impl std::fmt::Display) -> Self {
        CliError::Format {
            path: path.to_owned(),
            msg: msg.to_string(),
        }
    }
}

impl From<SoilError> for CliError {
    fn from(e: SoilError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ProbeError> for CliError {
    fn from(e: ProbeError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<VisionError> for CliError {
    fn from(e: VisionError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<TraverseError> for CliError {
    fn from(e: TraverseError) -> Self {
        match e {
            TraverseError::Infeasible { .. } | TraverseError::StartBlocked(_) => {
                CliError::Infeasible(e)
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
