use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("degenerate gradient |grad f| = {norm:e} at {point:?}")]
    DegenerateGradient { norm: f64, point: [f64; 3] },
    #[error("singular metric det g = {det:e} at (u, v) = ({u}, {v})")]
    SingularMetric { det: f64, u: f64, v: f64 },
    #[error("(u, v) = ({u}, {v}) lies outside the chart domain")]
    OutsideDomain { u: f64, v: f64 },
    #[error("surface `{0}` has no parametric chart")]
    NoChart(String),
    #[error("invalid surface parameter: {0}")]
    InvalidParameter(String),
    #[error("sample count must be at least 1")]
    EmptySample,
    #[error("Newton projection left |f| = {residual:e}")]
    ProjectionFailed { residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BracketError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("phase point is off the constraint manifold (|f|/|grad f| = {level:e}, |n.p| = {normal_momentum:e})")]
    OffManifold { level: f64, normal_momentum: f64 },
    #[error("constraint matrix is singular (|C12| = {c12:e})")]
    SingularConstraintMatrix { c12: f64 },
    #[error("geodesic invariants need a nonzero momentum")]
    ZeroMomentum,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantizeError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("chart is not orthogonal (|g_uv| / sqrt(g_uu g_vv) = {ratio:e}); structured grids need orthogonal charts")]
    NonOrthogonalChart { ratio: f64 },
    #[error("unsupported chart boundary: {0}")]
    UnsupportedBoundary(String),
    #[error("grid {n_u}x{n_v} is too small")]
    GridTooSmall { n_u: usize, n_v: usize },
    #[error("grid ladder needs at least {required} grids, got {got}")]
    LadderTooShort { required: usize, got: usize },
    #[error("grid ladder sizes must be strictly increasing")]
    LadderNotIncreasing,
    #[error("eigensolver did not converge after {iterations} iterations (max residual {max_residual:e})")]
    NoConvergence { iterations: usize, max_residual: f64 },
    #[error("shifted operator is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}
