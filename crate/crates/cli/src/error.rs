use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical blowup: {0}")]
    Blowup(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Blowup(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<riesz_core::Error> for CliError {
    fn from(e: riesz_core::Error) -> Self {
        use riesz_core::Error as E;
        match e {
            E::Grid(_) | E::Parameter(_) | E::Inadmissible(_) | E::Domain(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(format!("csv: {e}"))
    }
}

/// Result of a run that completed without a hard error.
#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    Blowup(String),
    Failed(String),
}

impl Status {
    pub fn into_result(self) -> Result<(), CliError> {
        match self {
            Status::Ok => Ok(()),
            Status::Blowup(m) => Err(CliError::Blowup(m)),
            Status::Failed(m) => Err(CliError::Verification(m)),
        }
    }
}
