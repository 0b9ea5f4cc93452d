use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input {path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("no valid records in corpus ({rejected} rejected)")]
    EmptyCorpus { rejected: usize },
    #[error("corpus spans {slices} time slice(s); at least 2 are required")]
    TooFewSlices { slices: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("word `{0}` is not in the vocabulary")]
    UnknownWord(String),
    #[error("slice interval [{start};{end}] is outside [1;{slices}]")]
    InvalidInterval { start: usize, end: usize, slices: usize },
    #[error("series is empty")]
    EmptySeries,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("interval of {differences} first difference(s) is too short for lag correlation")]
    IntervalTooShort { differences: usize },
    #[error("correlation {0} is outside [-1, 1]")]
    CorrelationOutOfRange(f64),
    #[error("at least two windows are needed, got {0}")]
    TooFewWindows(usize),
    #[error("invalid annotations: {0}")]
    Annotation(String),
    #[error("redundancy component around `{word}` holds {stored} stored events")]
    ComponentInvariant { word: String, stored: usize },
    #[error("invalid synthetic spec: {0}")]
    SyntheticSpec(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
