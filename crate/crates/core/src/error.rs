use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("no asset reaches the required coverage of {min_coverage}")]
    EmptyUniverse { min_coverage: f64 },

    #[error("invalid market spec: {0}")]
    Spec(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {len} observations but window width {width} (step {step})")]
    InsufficientData { len: usize, width: usize, step: usize },

    #[error("size error: {0}")]
    Size(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("graph is disconnected; enable the disconnected flow model to score it")]
    Disconnected,

    #[error("modularity is undefined for a graph without edges")]
    EmptyGraph,

    #[error("aggregation error: {0}")]
    Aggregation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
