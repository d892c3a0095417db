use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("malformed matrix file: {0}")]
    Format(String),
    /// Schema or value error in an experiment config, located by JSON pointer.
    #[error("config error at `{pointer}`: {message}")]
    Config { pointer: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] pace_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { pointer: pointer.into(), message: message.into() }
    }

    /// Process exit status: 2 for config errors, 3 when stitching fails, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Usage(_) => 2,
            Error::Core(pace_core::Error::StitchFailure(_) | pace_core::Error::NoAdmissibleSubgraph { .. }) => 3,
            _ => 1,
        }
    }
}
