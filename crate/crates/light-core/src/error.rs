//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, LightError>;

#[derive(Debug, Error)]
pub enum LightError {
    /// A parameter violates its documented range (r > 0, K > 0, 0 < N_T < K, ...).
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// Input outside a function's mathematical domain.
    #[error("domain error in {function}: {message}")]
    Domain {
        function: &'static str,
        message: String,
    },

    /// A computation degenerated (vanishing denominator, stalled iteration).
    #[error("numeric failure in {function} at {at}: {message}")]
    Numeric {
        function: &'static str,
        at: f64,
        message: String,
    },

    /// Vector/matrix shape mismatch.
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    /// A non-finite value surfaced during training.
    #[error("non-finite value in layer {layer} at epoch {epoch}, step {step}")]
    NonFinite {
        layer: usize,
        epoch: usize,
        step: usize,
    },

    /// Text parsing failed at a specific coordinate of the input file.
    #[error("parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },

    /// Label column does not reduce to exactly two classes.
    #[error("expected 2 label classes after binarization, found {0}")]
    LabelCardinality(usize),

    /// The folded dataset is not linearly separable through the origin.
    #[error("dataset is not linearly separable (min-norm point of the hull is ~0)")]
    NonSeparable,

    /// Malformed on-disk dataset cache.
    #[error("cache format error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
