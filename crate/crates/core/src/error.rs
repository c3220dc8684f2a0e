use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {dim} ({name}): value {value} lies outside [{lower}, {upper}]")]
    OutOfBounds {
        dim: usize,
        name: String,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid input space: {0}")]
    InvalidSpace(String),

    #[error("Sobol generator supports at most {max} dimensions, {requested} requested")]
    UnsupportedDimension { requested: usize, max: usize },

    #[error("Gauss-Legendre order {0} is outside 1..=64")]
    QuadratureOrder(usize),

    #[error("design of {size} points exceeds the cap of {cap}")]
    DesignTooLarge { size: u128, cap: usize },

    #[error("basis of {size} terms exceeds the cap of {cap}")]
    BasisTooLarge { size: u128, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("under-determined regression: {points} design points for {terms} basis terms")]
    UnderDetermined { points: usize, terms: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("wrong design: {0}")]
    WrongDesign(String),

    #[error(
        "aliasing: dimension {dim} has {nodes} quadrature nodes, order {order} needs at least {needed}"
    )]
    Aliasing {
        dim: usize,
        nodes: usize,
        order: usize,
        needed: usize,
    },

    #[error("matrix not positive definite at correlation lengths {lengths:?} (jitter up to {jitter:e})")]
    NotPositiveDefinite { lengths: Vec<f64>, jitter: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("simulator failed at point {point:?}: {message}")]
    Simulator { point: Vec<f64>, message: String },

    #[error("external simulator timed out after {secs} s")]
    Timeout { secs: u64 },

    #[error("{path}: expected {expected} rows, found {found}")]
    RowCount {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("{path}: malformed content: {message}")]
    Malformed { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
