use std::path::PathBuf;

/// Errors produced by the analysis toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{path}:{line_no}: {reason}")]
    Parse {
        path: PathBuf,
        line_no: usize,
        reason: String,
    },

    #[error("document {0} is empty")]
    EmptyDocument(usize),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("column `{0}` has zero variance")]
    ConstantColumn(String),

    #[error("singular design: column `{column}` is linearly dependent on {depends_on:?}")]
    Singular {
        column: String,
        depends_on: Vec<String>,
    },

    #[error("insufficient coverage, missing months: {}", missing.join(", "))]
    Coverage { missing: Vec<String> },

    #[error("unknown feature `{name}`; available: {}", available.join(", "))]
    UnknownFeature { name: String, available: Vec<String> },

    #[error("fit with K = {k} failed: {source}")]
    Fit {
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{key}: path does not exist: {}", path.display())]
    MissingPath { key: String, path: PathBuf },

    #[error("no songs admitted from {}", .0.display())]
    EmptyCorpus(PathBuf),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
