use thiserror::Error;

/// Errors produced by the numeric, set, objective, network and engine layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CoreError {
    #[error("dimension mismatch: {context} (left {left}, right {right})")]
    Dimension {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("non-finite entry at index {index}: {value}")]
    NonFinite { index: usize, value: f64 },

    #[error("singular system: pivot {pivot:e} below threshold {threshold:e} in column {column}")]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("empty intersection: coordinate {coord} has lower {lower} > upper {upper}")]
    Infeasible {
        coord: usize,
        lower: f64,
        upper: f64,
    },

    #[error("degenerate box: coordinate {coord} has zero width")]
    Degenerate { coord: usize },

    #[error("point outside set by {distance:e} (tolerance {tolerance:e})")]
    OutsideSet { distance: f64, tolerance: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("diagnostics failure: {0}")]
    Diagnostics(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
