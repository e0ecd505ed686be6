use thiserror::Error;

/// Errors shared across the evaluation and optimization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A DH row binds a joint index outside the chain's joint vector.
    #[error("malformed chain: row {row} binds joint {joint} but the chain has {joint_count} joints")]
    BadJointBinding {
        row: usize,
        joint: usize,
        joint_count: usize,
    },

    /// A chain failed a structural invariant (empty rows, unbound joint, ...).
    #[error("malformed chain: {0}")]
    MalformedChain(String),

    /// A joint value violated its limit in strict mode.
    #[error("joint {joint} value {value} outside limits [{min}, {max}]")]
    JointLimit {
        joint: usize,
        value: f64,
        min: f64,
        max: f64,
    },

    /// Chain has fewer joints than the operation supports.
    #[error("unsupported chain: {needed} joints required, chain has {actual}")]
    UnsupportedChain { needed: usize, actual: usize },

    /// Round-off went beyond the tolerated clamp window.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// An input value failed validation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Dimension mismatch between two coupled inputs.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A lookup table is missing a required entry.
    #[error("missing entry: {0}")]
    MissingEntry(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
