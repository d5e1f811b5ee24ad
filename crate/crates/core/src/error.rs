use thiserror::Error;

use crate::signal::BeatLabel;

/// Errors raised across the synthesis, matching and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("beat window [{start}, {end}] exceeds signal of length {len}")]
    OutOfBounds { start: i64, end: i64, len: usize },
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("invalid beat window: {0}")]
    InvalidWindow(String),
    #[error("signal too short: {len} samples, need at least {required}")]
    TooShort { len: usize, required: usize },
    #[error("no beats found")]
    NoBeatsFound,
    #[error("empty input")]
    EmptyInput,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("insufficient beats: have {have}, need {need}")]
    InsufficientBeats { have: usize, need: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("beat {id} is missing descriptor {feature}")]
    MissingDescriptor { id: u64, feature: String },
    #[error("duplicate beat id {0}")]
    DuplicateId(u64),
    #[error("no {0} beats available in the store")]
    LabelEmpty(BeatLabel),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("target R-R interval of {samples} samples at position {position} is too short")]
    RrTooShort { position: usize, samples: i64 },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("reference signal is all zero")]
    ZeroReference,
    #[error("dataset has a single class")]
    SingleClass,
    #[error("too few rows: have {have}, need {need}")]
    TooFewRows { have: usize, need: usize },
    #[error("too few beats: have {have}, window needs {need}")]
    TooFewBeats { have: usize, need: usize },
    #[error("empty test set")]
    EmptyTestSet,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
