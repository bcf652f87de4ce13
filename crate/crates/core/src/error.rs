use thiserror::Error;

use crate::field::FieldSpec;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("field mismatch: {left} vs {right}")]
    FieldMismatch { left: FieldSpec, right: FieldSpec },

    #[error("division by zero")]
    DivisionByZero,

    /// Shapes, index ranges and other structural preconditions.
    #[error("structural error: {0}")]
    Structure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension violation: {0}")]
    DimensionViolation(String),

    /// Indices here and below are one-based, matching the printed reports.
    #[error("inconsistent factorization: D·E differs from F at row {row}, column {col}")]
    InconsistentFactorization { row: usize, col: usize },

    #[error("rank-deficient decoder: rank(D) = {rank} < K = {k}")]
    RankDeficientDecoder { rank: usize, k: usize },

    #[error("randomness not in Null(D): D·C is nonzero at row {row}, column {col}")]
    RandomnessNotInNullSpace { row: usize, col: usize },

    #[error("insecure factorization: user {user} reduced-rank = {rank} < K−1 = {required}")]
    InsecureFactorization {
        user: usize,
        rank: usize,
        required: usize,
    },

    #[error("enumeration infeasible: {states} states exceed the limit of {limit}")]
    EnumerationInfeasible { states: u128, limit: u128 },

    #[error("randomness rank condition violated for user {user}: unbounded leakage direction (λ_min(Y_k Y_kᵀ) = {lambda_min:.3e})")]
    UnboundedLeakage { user: usize, lambda_min: f64 },

    #[error("singular conditioning covariance for user {user}: {detail}")]
    SingularCovariance { user: usize, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
