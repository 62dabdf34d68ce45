use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("invalid language tag {0:?}")]
    InvalidLangTag(String),

    #[error("invalid token {0:?}")]
    InvalidToken(String),

    #[error("{}:{line}: malformed row: {reason}", path.display())]
    MalformedRow { path: PathBuf, line: usize, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: header mismatch: {reason}", path.display())]
    HeaderMismatch { path: PathBuf, reason: String },

    #[error("{}:{line}: parse error: {reason}", path.display())]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error("duplicate token {0:?}")]
    DuplicateToken(String),

    #[error("line count mismatch: {src_lines} source lines, {tgt_lines} target lines")]
    LineCountMismatch { src_lines: usize, tgt_lines: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("empty vector")]
    EmptyVector,

    #[error("requested rank {k} exceeds min dimension {max}")]
    RankTooLarge { k: usize, max: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("non-finite value: {0}")]
    NonFiniteValue(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("no dictionary pair has both words in vocabulary")]
    NoUsablePairs,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("sentence pair has an empty side")]
    EmptySide,

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("degenerate vocabulary: {0} surviving types")]
    DegenerateVocabulary(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty sentence")]
    EmptySentence,

    #[error("empty dataset")]
    EmptyDataset,

    #[error("size {size} out of range (corpus has {available} pairs)")]
    SizeOutOfRange { size: usize, available: usize },

    #[error("no sizes given")]
    EmptySizes,

    #[error("value {0} outside [0, 1]")]
    OutOfRange(f64),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
