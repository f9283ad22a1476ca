use std::path::PathBuf;

use fairscreen_core::attributes::{NormalizationError, TableError};
use fairscreen_core::inconsistency::InconsistencyError;
use fairscreen_core::indicators::IndicatorError;
use fairscreen_core::layout::LayoutError;
use fairscreen_core::prefmodel::ModelError;
use fairscreen_core::session::{CorruptLog, SessionError};
use fairscreen_core::{AppId, ParseError};
use serde::Serialize;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("application record {index} ({path}): {source}", path = source.path())]
    Record { index: usize, source: ParseError },
    #[error("duplicate app_id {0}")]
    DuplicateApp(AppId),
    #[error("unknown application {0}")]
    UnknownApp(AppId),
    #[error(transparent)]
    Tables(#[from] TableError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Normalization(#[from] NormalizationError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Indicators(#[from] IndicatorError),
    #[error(transparent)]
    Inconsistency(#[from] InconsistencyError),
    #[error(transparent)]
    CorruptLog(#[from] CorruptLog),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("{0}")]
    Usage(String),
}

/// First identifier of a `Debug` rendering, i.e. the variant name.
fn variant_name(debug: String) -> String {
    debug.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect()
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Format { path: path.into(), message: message.to_string() }
    }

    /// Stable machine-readable error kind.
    pub fn kind(&self) -> String {
        match self {
            Error::Io { .. } => "Io".into(),
            Error::Format { .. } => "Format".into(),
            Error::Record { source, .. } => variant_name(format!("{source:?}")),
            Error::DuplicateApp(_) => "DuplicateApp".into(),
            Error::UnknownApp(_) => "UnknownApp".into(),
            Error::Tables(e) => variant_name(format!("{e:?}")),
            Error::Model(ModelError::Normalization(e)) | Error::Normalization(e) => variant_name(format!("{e:?}")),
            Error::Model(e) => variant_name(format!("{e:?}")),
            Error::Layout(LayoutError::Embedding(e)) => variant_name(format!("{e:?}")),
            Error::Layout(e) => variant_name(format!("{e:?}")),
            Error::Indicators(IndicatorError::Stats(e)) => variant_name(format!("{e:?}")),
            Error::Indicators(e) => variant_name(format!("{e:?}")),
            Error::Inconsistency(e) => variant_name(format!("{e:?}")),
            Error::CorruptLog(_) => "CorruptLog".into(),
            Error::Session(e) => variant_name(format!("{e:?}")),
            Error::Usage(_) => "Usage".into(),
        }
    }

    /// I/O failures are runtime errors; everything else is input that
    /// failed validation.
    pub fn is_runtime(&self) -> bool {
        matches!(self, Error::Io { .. })
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_runtime() {
            3
        } else {
            2
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord { error: ErrorBody { kind: self.kind(), message: self.to_string() } }
    }
}

/// The error document printed by the CLI and returned by the service.
#[derive(Debug, Clone, Serialize, serde::Deserialize, PartialEq)]
pub struct ErrorRecord {
    pub error: ErrorBody,
}

#[derive(Debug, Clone, Serialize, serde::Deserialize, PartialEq)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}
