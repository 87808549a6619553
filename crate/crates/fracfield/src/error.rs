//! Crate-wide error type.

/// Errors produced by mesh construction, calibration, assembly, and studies.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension must be 1 or 2, got {0}")]
    InvalidDimension(usize),

    #[error("mesh needs at least one interior node per axis, got n = {0}")]
    InvalidMesh(usize),

    #[error("point {point:?} has {got} coordinates, expected {expected}")]
    DimensionMismatch { point: Vec<f64>, got: usize, expected: usize },

    #[error("point {0:?} lies outside the closed unit domain")]
    OutOfDomain(Vec<f64>),

    #[error("fractional exponent beta must lie in (0, 1), got {0}")]
    InvalidBeta(f64),

    #[error("{name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },

    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },

    #[error("mesh size h must lie in (0, 1), got {0}")]
    InvalidMeshSize(f64),

    #[error("functional order p must be at least 2, got {0}")]
    InvalidFunctionalOrder(u32),

    #[error("cannot parse functional spec {0:?}; expected \"abs:<p>\" or \"probit:<a>:<c>\"")]
    BadFunctionalSpec(String),

    #[error("variance series requires 4 beta / d > 1, got beta = {beta}, d = {d}")]
    VarianceDiverges { beta: f64, d: usize },

    #[error("matern scale requires 2 beta > d / 2, got beta = {beta}, d = {d}")]
    MaternUndefined { beta: f64, d: usize },

    #[error("grid needs at least two points per axis, got {0}")]
    InvalidGrid(usize),

    #[error("series truncation must keep at least one mode, got {0}")]
    InvalidTruncation(usize),

    #[error("value list length {got} does not match grid size {expected}")]
    GridMismatch { got: usize, expected: usize },

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix shapes are incompatible: {0}")]
    ShapeMismatch(String),

    #[error(
        "dense assembly for {dim} unknowns needs {required} bytes, over the cap of {cap} bytes"
    )]
    MemoryCap { dim: usize, required: usize, cap: usize },

    #[error("assembled operator is asymmetric: relative Frobenius defect {0:.3e}")]
    Asymmetric(f64),

    #[error("eigendecomposition oracle is limited to {max} unknowns, got {got}")]
    OracleTooLarge { got: usize, max: usize },

    #[error("eigendecomposition failed to converge")]
    EigenFailed,

    #[error("rate fit needs at least two usable (h, error) points, got {0}")]
    TooFewPoints(usize),

    #[error("study config error: {0}")]
    BadConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
