use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("divided difference needs at least one point")]
    EmptyPoints,

    #[error("derivative of order {order} requested but only orders up to {available} are available")]
    MissingDerivative { order: usize, available: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("y is not majorized by x (first violated partial sum at k = {witness_k})")]
    NotMajorized { witness_k: usize },

    #[error(
        "weighted majorization not verified: |a - bA| = {weight_residual:e}, |y - xA^T| = {point_residual:e}"
    )]
    MajorizationNotVerified {
        weight_residual: f64,
        point_residual: f64,
    },

    #[error("weights must sum to 1 (sum = {0})")]
    WeightsNotNormalized(f64),

    #[error("weight {index} is invalid: {value}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("point {value} lies outside [{lower}, {upper}]")]
    PointOutOfInterval { value: f64, lower: f64, upper: f64 },

    #[error("interval [{lower}, {upper}] is degenerate")]
    DegenerateInterval { lower: f64, upper: f64 },

    #[error("invalid stochastic matrix: {0}")]
    InvalidMatrix(String),

    #[error("quadrature did not reach tolerance {tolerance:e} within {max_subdivisions} subdivisions (error estimate {estimate:e})")]
    QuadratureFailure {
        tolerance: f64,
        estimate: f64,
        max_subdivisions: usize,
    },

    #[error("kernel condition is indefinite; the higher-order bound does not apply")]
    KernelConditionIndefinite,

    #[error("ratio {ratio} lies outside the generator domain [{lower}, {upper}]")]
    RatioOutOfDomain { ratio: f64, lower: f64, upper: f64 },

    #[error("modulus {requested} exceeds the certified modulus {certified}")]
    ModulusNotCertified { requested: f64, certified: f64 },

    #[error("`{function}` is not convex on its interval (min f''/2 = {min_scaled})")]
    NotConvex { function: String, min_scaled: f64 },

    #[error("kernel `{0}` is not strongly convex; bounds are unavailable")]
    NotStronglyConvex(String),

    #[error("aggregate weight <p, r_{row}> = {value} is not positive")]
    ZeroAggregateWeight { row: usize, value: f64 },

    #[error("not a positive probability vector: {0}")]
    NotAProbabilityVector(String),

    #[error("entry {index} must be strictly positive, got {value}")]
    NonPositiveEntry { index: usize, value: f64 },

    #[error("unknown function or kernel `{0}`")]
    UnknownFunction(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
