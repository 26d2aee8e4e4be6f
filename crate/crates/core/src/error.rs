use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid country code {0:?}")]
    InvalidCountry(String),

    #[error("country {0} is not in the configured universe")]
    UnknownCountry(String),

    #[error("invalid date {0:?}")]
    InvalidDate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid trace for user {user}: {reason}")]
    InvalidTrace { user: String, reason: String },

    #[error("event {user} {origin}->{destination} {month} is outside the table: {reason}")]
    EventOutOfRange {
        user: String,
        origin: String,
        destination: String,
        month: String,
        reason: String,
    },

    #[error("flow table metadata mismatch: {0}")]
    MetadataMismatch(String),

    #[error("flow table stage is {found}, expected {expected}")]
    WrongStage { found: String, expected: String },

    #[error("weight model does not cover {} origin-year(s): {}", .0.len(), .0.join(", "))]
    UncoveredWeights(Vec<String>),

    #[error("raking: {0}")]
    Raking(String),

    #[error("sigma search failed: {0}")]
    SigmaBracket(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
