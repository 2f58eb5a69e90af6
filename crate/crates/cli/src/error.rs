use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {msg}")]
    ConfigAt { line: usize, msg: String },
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Core(#[from] richards_core::Error),
    /// At least one time step or study run stopped at the iteration limit.
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn config_at(line: usize, msg: impl Into<String>) -> Self {
        Self::ConfigAt { line, msg: msg.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// 1 for non-convergence and failed certification, 2 for everything
    /// the user has to fix before rerunning.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::NotConverged(_) | Self::CertificationFailed(_) => 1,
            Self::Core(richards_core::Error::LschemeNotConverged { .. }) => 1,
            Self::Core(richards_core::Error::CgNotConverged { .. }) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
