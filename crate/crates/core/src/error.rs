use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid scenario script: {0}")]
    InvalidScript(String),

    #[error("calibration window is empty")]
    NoCalibrationData,

    #[error("degenerate calibration fit (gain {gain})")]
    DegenerateFit { gain: f64 },

    #[error("sample at t={t_ms} ms precedes previous sample at t={last_ms} ms")]
    OutOfOrderSample { t_ms: i64, last_ms: i64 },

    #[error("no relocation candidates")]
    NoCandidates,

    #[error("no scenarios")]
    NoScenarios,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}
