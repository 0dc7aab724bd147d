use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate triangle: {0}")]
    DegenerateTriangle(String),

    /// The base `p1 x0` of the subtriangle used by the pointwise bound has zero length.
    #[error("degenerate base: x0 coincides with p1")]
    DegenerateBase,

    #[error("degenerate subtriangle: x0 lies on segment p1p3")]
    DegenerateSubtriangle,

    #[error("degenerate shape parameters (alpha = {alpha}, theta = {theta})")]
    DegenerateShape { alpha: f64, theta: f64 },

    #[error("degenerate element {0}: functional matrix is singular")]
    DegenerateElement(usize),

    /// Cholesky hit a non-positive pivot. For the assembled stiffness matrix this means
    /// an assembly bug.
    #[error("matrix is not symmetric positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("insufficient data: {nodes} nodes cannot determine a degree-{degree} fit (need N >= degree)")]
    InsufficientData { nodes: usize, degree: usize },

    /// A Rayleigh quotient whose denominator vanishes (or a non-positive eigenvalue
    /// bound) gives no information.
    #[error("vacuous bound: {0}")]
    VacuousBound(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
