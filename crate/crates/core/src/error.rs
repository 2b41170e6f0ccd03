use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{file}:{line}:{column}: {message}")]
    Parse {
        file: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown {kind} `{id}`")]
    UnknownEntity { kind: &'static str, id: String },

    #[error("dataset fully filtered: {0}")]
    EmptyDataset(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model capability error: {0}")]
    Capability(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("undefined distribution: {0}")]
    UndefinedDistribution(String),

    #[error("empty group: {0}")]
    EmptyGroup(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("split leakage: {0}")]
    Leakage(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn unknown(kind: &'static str, id: impl ToString) -> Self {
        Error::UnknownEntity {
            kind,
            id: id.to_string(),
        }
    }

    /// Wraps the error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            already @ Error::Stage { .. } => already,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// Process exit code: 1 usage/config, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Stage { source, .. } => source.exit_code(),
            Error::Parse { .. }
            | Error::UnknownEntity { .. }
            | Error::EmptyDataset(_)
            | Error::Capability(_)
            | Error::Fit(_)
            | Error::UndefinedDistribution(_)
            | Error::EmptyGroup(_)
            | Error::DegenerateInput(_)
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::Json(_) => 2,
            Error::Leakage(_) => 3,
        }
    }
}
