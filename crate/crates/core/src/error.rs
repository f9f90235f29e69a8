use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("word cap exceeded: bit {index} requested but cap depth is {cap}")]
    CapExceeded { index: usize, cap: usize },

    #[error("column truncation exceeded: column index {index} is beyond K = {k}")]
    TruncationExceeded { index: usize, k: usize },

    #[error("growth sequence exhausted at index {0} (repeat_last is off)")]
    GrowthExhausted(usize),

    #[error("invalid growth spec: {0}")]
    InvalidGrowth(String),

    #[error("infeasible rectangle: {0}")]
    InfeasibleRectangle(String),

    #[error("region has zero tracked mass")]
    EmptyRegion,

    #[error("seed traces collide on seed {0}")]
    SeedCollision(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("enumeration too large: {states} states exceeds limit {limit}")]
    EnumerationTooLarge { states: u128, limit: u128 },

    #[error("level {level} exceeds cap {cap}")]
    LevelTooLarge { level: usize, cap: usize },

    #[error("frequency {0} is out of range")]
    OutOfRange(String),

    #[error("grid of size {grid} is too coarse, need at least {needed}")]
    GridTooCoarse { grid: u64, needed: String },
}

impl Error {
    /// True for errors caused by the lazy-word cap or column truncation.
    pub fn is_cap_or_truncation(&self) -> bool {
        matches!(
            self,
            Error::CapExceeded { .. } | Error::TruncationExceeded { .. } | Error::GrowthExhausted(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
