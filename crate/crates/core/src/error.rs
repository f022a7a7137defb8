use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("variable name lists differ")]
    NameMismatch,

    #[error("unknown variable name `{0}`")]
    UnknownName(String),

    #[error("graph contains a directed cycle")]
    Cyclic,

    #[error("matrix exponential overflowed (input norm {norm:e}); rescale the weights")]
    ExpmOverflow { norm: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("unsupported physics graph size {0}; expected 3, 5 or 7")]
    UnsupportedSize(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("response has no complete <Answer>...</Answer> tag pair")]
    MissingTags,

    #[error("answer `{0}` is not one of A, B, C, D")]
    InvalidLetter(String),

    #[error("pair ({0}, {1}) appears more than once")]
    DuplicatePair(String, String),

    #[error("edge count {count} out of range 0..={max}")]
    EdgeCountOutOfRange { count: usize, max: usize },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("prior source failure: {0}")]
    PriorSource(String),

    #[error("mismatched metric sets: {0}")]
    MetricSetMismatch(String),

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
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
