use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation requires an undirected graph")]
    InvalidKind,

    #[error("instance too large for exact search: n = {n}, limit = {limit}")]
    SizeLimit { n: usize, limit: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("could only find {found} independent rows, {wanted} requested")]
    RankExtraction { wanted: usize, found: usize },

    #[error("decoding failed: {0}")]
    Decoding(String),

    #[error("histogram slice is empty")]
    EmptyHistogram,

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("inconsistent code: {0}")]
    InconsistentCode(String),

    #[error("extraction failed: {0}")]
    Extraction(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
