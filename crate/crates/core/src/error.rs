use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate basis: |det| = {det:e} is not above {threshold:e}")]
    DegenerateBasis { det: f64, threshold: f64 },

    #[error("invalid dimension {0}: expected 1, 2 or 3")]
    InvalidDimension(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("energy {energy:e} J is below the rest energy {rest:e} J")]
    BelowRestEnergy { energy: f64, rest: f64 },

    #[error("mode index {index} outside (-{half}, {half}]")]
    ModeIndexOutOfRange { index: i64, half: i64 },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
