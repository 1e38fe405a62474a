use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the dislocation dynamics library.
#[derive(Debug, Error)]
pub enum DddError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("acoustic tensor is near-singular: smallest eigenvalue {min_eigenvalue:e} below floor {floor:e}")]
    NearSingular { min_eigenvalue: f64, floor: f64 },

    #[error("zero vector supplied where a direction is required")]
    ZeroVector,

    #[error("operation requires an isotropic elasticity tensor")]
    NonIsotropic,

    #[error("network is empty")]
    EmptyNetwork,

    #[error("loop {loop_index} is invalid: {reason}")]
    InvalidLoop { loop_index: usize, reason: String },

    #[error("loop {loop_index}, segment {segment}: degenerate segment of length {length:e}")]
    DegenerateSegment {
        loop_index: usize,
        segment: usize,
        length: f64,
    },

    #[error("loop {loop_index} has length {length} < {minimum}, too short to remesh")]
    LoopTooShort {
        loop_index: usize,
        length: f64,
        minimum: f64,
    },

    #[error("spanning surface construction failed: {0}")]
    Surface(String),

    #[error("velocity constraint violated: |v.tau| = {violation:e}")]
    ConstraintViolation { violation: f64 },

    #[error("hairpin node {node} on loop {loop_index}: tangent is degenerate, remesh required")]
    Hairpin { loop_index: usize, node: usize },

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("mass ratio {theta} exceeded blow-up threshold {threshold}")]
    BlowUp { theta: f64, threshold: f64 },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl DddError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        DddError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DddError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, DddError>;
