use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point lies inside the body (sdf = {sdf:e})")]
    PointInsideBody { sdf: f64 },
    #[error("{what} did not converge within {budget} iterations")]
    NoConvergence { what: &'static str, budget: usize },
    #[error("negative offset {0} (inner parallel bodies are not supported)")]
    NegativeOffset(f64),
    #[error("boundary extraction found no surface at resolution {0}")]
    MeshingFailure(usize),
    #[error("curvature extrapolation diverges at a ridge point")]
    RidgePoint,
    #[error("operation requires a smooth body")]
    NonsmoothBody,
    #[error("evaluation at the pole t = 0")]
    PoleEvaluation,
    #[error("infeasible splice: H0 * t0 = {0} < 1")]
    InfeasibleSplice(f64),
    #[error("invalid dimension n = {0} (need n >= 2)")]
    InvalidDimension(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("divergence of the improper integral could not be decided")]
    Inconclusive,
    #[error("domain mismatch: r = {r} outside [{lo}, {hi}]")]
    DomainMismatch { r: f64, lo: f64, hi: f64 },
    #[error("domain too thin: fewer than 3 fluid cells across the gap")]
    DomainTooThin,
    #[error("offset {0} places the flux surface outside the solved domain")]
    OffsetOutsideDomain(f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),
}
