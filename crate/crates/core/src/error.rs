use thiserror::Error;

/// Crate-wide error type. Variants are grouped roughly by the layer that
/// raises them: expression parsing/evaluation, tensor algebra, frame
/// assembly, and configuration handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("coordinate x{index} out of range for dimension {dim}")]
    CoordOutOfRange { index: usize, dim: usize },

    #[error("parameter `{name}` has no bound value")]
    UnboundParameter { name: String },

    #[error("domain violation in `{subexpr}` at point {point:?}: {message}")]
    Domain {
        subexpr: String,
        message: String,
        point: Vec<f64>,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("variance mismatch: {0}")]
    Variance(String),

    #[error("tensor slot out of range: {0}")]
    Slot(String),

    #[error("singular or badly conditioned metric: {0}")]
    Singular(String),

    #[error("seed vectors rank deficient ({stage})")]
    RankDeficient { stage: String },

    #[error("matrix not positive definite ({stage}): pivot {pivot:e}")]
    NotPositiveDefinite { pivot: f64, stage: String },

    #[error("structure invariant `{name}` violated: residual {residual:e}")]
    Invariant { name: String, residual: f64 },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
