use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed embedding header: {0}")]
    MalformedHeader(String),

    #[error("embedding row {row}: expected {expected} components, found {found}")]
    DimensionMismatch { row: usize, expected: usize, found: usize },

    #[error("embedding row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("token {0:?} has a zero-norm vector")]
    ZeroNormToken(String),

    #[error("none of the tokens {0:?} are in the vocabulary")]
    AllTokensOov(Vec<String>),

    #[error("cannot operate on an empty set")]
    EmptySet,

    #[error("vector dimension {found} does not match space dimension {expected}")]
    WrongDimension { expected: usize, found: usize },

    #[error("zero-norm vector has no direction")]
    ZeroNorm,

    #[error("percentile must lie in (0, 100], got {0}")]
    InvalidPercentile(f64),

    #[error("duplicate concept id {0:?}")]
    DuplicateConcept(String),

    #[error("concept definition {id:?} is invalid: {message}")]
    InvalidConcept { id: String, message: String },

    #[error("unknown concept id {0:?}")]
    UnknownConcept(String),

    #[error("no concept in the repository can be scored")]
    NoScoreableConcepts,

    #[error("score track for video {video:?} concept {concept:?} has no samples")]
    EmptyTrack { video: String, concept: String },

    #[error("score {value} outside [0, 1]{}", location(.line))]
    ScoreOutOfRange { value: f64, line: Option<usize> },

    #[error("tracks mix video ids {0:?} and {1:?}")]
    MixedVideos(String, String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path} line {line}: {message}")]
    ParseLine {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("video {video:?} has {found} concept scores, repository has {expected} concepts")]
    ScoreLength {
        video: String,
        expected: usize,
        found: usize,
    },

    #[error("event {0:?} has no query terms left after stop-word removal")]
    EmptyQuery(String),

    #[error("duplicate event id {0:?}")]
    DuplicateEvent(String),

    #[error("event {0:?} has no ground truth")]
    UnknownEvent(String),

    #[error("event {0:?} has no labeled positive videos")]
    NoPositives(String),

    #[error("event {0:?} needs both positive and negative labeled videos")]
    SingleClass(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

fn location(line: &Option<usize>) -> String {
    match line {
        Some(l) => format!(" on line {l}"),
        None => String::new(),
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
