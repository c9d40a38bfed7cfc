use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{field}: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Core(#[from] entperc::Error),

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write CSV {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// 2 for anything wrong with the requested experiment, 3 when a solver
    /// fails on a valid one, 1 when results cannot be written.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(_) => 2,
            CliError::Output { .. } | CliError::Csv { .. } => 1,
        }
    }
}
