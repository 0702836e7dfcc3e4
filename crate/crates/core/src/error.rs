use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("truncation size {got} is below the minimum {min}")]
    TruncationTooSmall { got: usize, min: usize },

    #[error("flux density z^2 must be positive, got {0}")]
    NonPositiveFlux(f64),

    #[error("flux density z^2 must be non-negative and finite, got {0}")]
    InvalidFlux(f64),

    #[error("tension R must be positive and finite, got {0}")]
    NonPositiveTension(f64),

    #[error("angle {theta} outside admissible range [0, {max}]")]
    AngleOutOfRange { theta: f64, max: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operator must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator has non-finite entries")]
    NonFinite,

    #[error("projector margin {margin} must be smaller than dimension {dim}")]
    MarginTooLarge { margin: usize, dim: usize },

    #[error("amplitude must be non-negative, got {0}")]
    NegativeAmplitude(f64),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("minimisation bracket [{lo}, {hi}] does not contain an interior minimum")]
    Bracket { lo: f64, hi: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
