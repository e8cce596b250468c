use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("curves are on different time grids")]
    GridMismatch,

    #[error("target time {time} outside source range [{min}, {max}]")]
    Extrapolation { time: f64, min: f64, max: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("PCA semi-metric used before fitting")]
    UnfittedPca,

    #[error("PCA rank {q} exceeds {what} ({max})")]
    PcaRank {
        q: usize,
        max: usize,
        what: &'static str,
    },

    #[error("bandwidth must be positive and finite, got {0}")]
    NonPositiveBandwidth(f64),

    #[error("nearest-neighbour rank {k} out of range 1..={n}")]
    KnnRankOutOfRange { k: usize, n: usize },

    #[error("no usable bandwidth: every fold had an empty ball for every candidate")]
    NoUsableBandwidth,

    #[error(
        "path too short: {len} samples cannot form {segments} segments of at least 2 samples each"
    )]
    PathTooShort { len: usize, segments: usize },

    #[error("{path}:{line}: {msg}")]
    CsvData {
        path: String,
        line: u64,
        msg: String,
    },

    #[error("{path}: {msg}")]
    FileFormat { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
