use jamcraft_core::JamError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("grid point {grid}, trial {trial}: {source}\nscenario: {scenario}")]
    Trial {
        grid: usize,
        trial: usize,
        #[source]
        source: JamError,
        scenario: String,
    },
    #[error("grid point {grid}, trial {trial}: non-finite {what}\nscenario: {scenario}")]
    NonFinite {
        grid: usize,
        trial: usize,
        what: &'static str,
        scenario: String,
    },
    #[error("grid point {grid}, trial {trial}: iterative solver did not converge\nscenario: {scenario}")]
    NonConvergence {
        grid: usize,
        trial: usize,
        scenario: String,
    },
    #[error(transparent)]
    Core(#[from] JamError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl HarnessError {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => 2,
            HarnessError::Core(JamError::InvalidInput(_)) => 2,
            HarnessError::Trial { .. } | HarnessError::NonFinite { .. } | HarnessError::Core(_) => 3,
            HarnessError::NonConvergence { .. } => 4,
            _ => 1,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
