use std::io;
use std::path::PathBuf;

use edgediff_core::graph::GraphError;
use edgediff_core::sampler::SampleError;
use edgediff_core::schedule::ScheduleError;
use edgediff_core::stats::StatsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {msg}", path.display())]
    Input { path: PathBuf, msg: String },
    #[error("graphs differ in size: {0}")]
    Mismatch(GraphError),
    #[error("schedule solver failed: {0}")]
    Solver(ScheduleError),
    #[error("sampling failed: {0}")]
    Sampler(#[from] SampleError),
    #[error("statistics failed: {0}")]
    Stats(#[from] StatsError),
}

impl CliError {
    /// 0 success, 1 usage, 2 I/O, 3 solver or sampler failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } | CliError::Input { .. } | CliError::Mismatch(_) => 2,
            CliError::Solver(_) | CliError::Sampler(_) | CliError::Stats(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<ScheduleError> for CliError {
    fn from(e: ScheduleError) -> Self {
        match e {
            ScheduleError::InvalidConfig(_)
            | ScheduleError::UnknownGamma(_)
            | ScheduleError::NonPositiveGamma { .. }
            | ScheduleError::LengthMismatch { .. } => CliError::Usage(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}
