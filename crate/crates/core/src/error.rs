use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::report::ValidationReport;

/// Failures of project-folder operations. Validation findings travel as
/// [`ProjectError::Invalid`]; everything else is an environment or
/// precondition failure.
#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("project is invalid:\n{0}")]
    Invalid(ValidationReport),
    #[error("no staged asset provided for {0:?}")]
    MissingStagedAsset(String),
    #[error("destination {} exists and is not empty", .0.display())]
    DestinationNotEmpty(PathBuf),
    #[error("archive entry {0:?} would be written outside the destination")]
    PathEscape(String),
    #[error("zip archive: {0}")]
    Zip(#[from] zip::result::ZipError),
    #[error("manifest encoding: {0}")]
    Json(#[from] serde_json::Error),
}

impl ProjectError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        ProjectError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn report(&self) -> Option<&ValidationReport> {
        match self {
            ProjectError::Invalid(report) => Some(report),
            _ => None,
        }
    }
}

pub type Result<T, E = ProjectError> = std::result::Result<T, E>;
