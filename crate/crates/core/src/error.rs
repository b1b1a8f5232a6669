use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GafError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("point {z} lies outside the domain")]
    OutsideDomain { z: Complex64 },

    #[error("region is not contained in the ensemble domain")]
    RegionOutsideDomain,

    #[error("truncation tolerance {epsilon:e} unreachable within {max_order} terms")]
    TruncationUnreachable { epsilon: f64, max_order: usize },

    #[error("a zero lies on (or numerically at) the contour; min relative |psi| = {min_relative:e}")]
    BoundaryZero { min_relative: f64 },

    #[error("contour integral did not converge to an integer (last value {value})")]
    NotConverged { value: f64 },

    #[error("leading coefficient vanishes: realized degree {realized} < nominal {nominal}")]
    DegreeDrop { nominal: usize, realized: usize },

    #[error("matrix is rank deficient (rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("curves of different dimension ({left} vs {right}) cannot be equivalent")]
    DimensionMismatch { left: usize, right: usize },

    #[error("family has no closed form for this quantity")]
    NoClosedForm,

    #[error("squared norm vanishes at {z}; log-singular curve")]
    KernelVanishes { z: Complex64 },

    #[error("estimate unreliable: {0}")]
    Unreliable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GafError>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> GafError {
    GafError::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
