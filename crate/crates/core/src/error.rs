use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("phrase {0:?} is not in the signal lexicon")]
    NotInLexicon(String),

    #[error("person annotation {start}..{end} does not fit a text of {len} characters")]
    AnnotationAlignment { start: usize, end: usize, len: usize },

    #[error("cannot parse timestamp {0:?}")]
    TimestampParse(String),

    #[error("{0} lies outside the corpus span")]
    OutOfSpan(String),

    #[error("entity calendar has no entry for month {0}")]
    CalendarMiss(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("sequence of length {len} exceeds max_len {max_len}")]
    SequenceTooLong { len: usize, max_len: usize },

    #[error("span {start}..{end} is out of bounds for a sequence of length {len}")]
    SpanBounds { start: usize, end: usize, len: usize },

    #[error("checkpoint format version {found} is not supported (expected {expected})")]
    IncompatibleCheckpoint { found: u32, expected: u32 },

    #[error("checkpoint is corrupt: {0}")]
    ChecksumFailure(String),

    #[error("cannot evaluate an empty prediction set")]
    EmptyEval,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("word {word:?} does not occur in period {period}")]
    MissingOccurrences { word: String, period: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("stage {stage} requires {path:?}, which does not exist")]
    DependencyMissing { stage: String, path: PathBuf },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
