use thiserror::Error;

use crate::structures::PointId;

/// Errors raised by the geometry kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// An operator that must be inverted is singular or too badly conditioned.
    /// Inside the charts this means the point left the chart domain.
    #[error("singular operator (condition estimate {condition:e} exceeds cap {cap:e})")]
    SingularOperator { condition: f64, cap: f64 },

    #[error("operator does not anticommute with the base structure (residual {residual:e})")]
    AnticommutationViolation { residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "operator at point {point} is not an almost complex structure (residual {residual:e})"
    )]
    NotAlmostComplex { point: PointId, residual: f64 },

    #[error("structure at point {point} is not positive associated: {reason}")]
    NotAssociated { point: PointId, reason: String },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid sample space: {0}")]
    InvalidSpace(String),

    #[error("degenerate plane (Gram determinant {0:e})")]
    DegeneratePlane(f64),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
