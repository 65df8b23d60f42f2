use thiserror::Error;

/// Errors produced by model validation, scoring, experiments and export.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Stationarity bound violated; simulation and the stationary
    /// distribution require |phi| < 1.
    #[error("nonstationary model: |phi| < 1 required, got phi = {phi}")]
    NonStationary { phi: f64 },

    #[error("outlier index {index} out of range (valid: 1..={len}, 1-based)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("series too short: scoring needs at least 2 observations, got {len}")]
    SeriesTooShort { len: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("empty results")]
    EmptyResults,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("replication {rep_id} failed: {source}")]
    Replication {
        rep_id: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
