use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Pgm {
        path: PathBuf,
        #[source]
        source: snpmrf::PgmError,
    },
    #[error("{0}")]
    Input(String),
    #[error("solver failed: {0}")]
    Solver(String),
}

impl CliError {
    /// 1 usage, 2 I/O or parse, 3 solver.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } | CliError::Pgm { .. } | CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<snpmrf::SolveError> for CliError {
    fn from(e: snpmrf::SolveError) -> Self {
        match e {
            snpmrf::SolveError::UnknownMethod(_) | snpmrf::SolveError::UnknownInit(_) => {
                CliError::Usage(e.to_string())
            }
            snpmrf::SolveError::Model(m) => CliError::Solver(m.to_string()),
        }
    }
}
