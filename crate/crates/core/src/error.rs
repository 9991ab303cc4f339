use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure of the closest-point map onto the curved boundary.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ProjectionError {
    #[error("closest-point Newton iteration did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("ambiguous projection: parameters {t0} and {t1} are equally close")]
    AmbiguousProjection { t0: f64, t1: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("projection failure: {0}")]
    Projection(#[from] ProjectionError),
    #[error("mesh quality failure: minimum angle {min_angle_deg:.3} deg in triangle {triangle}")]
    QualityFailure { triangle: usize, min_angle_deg: f64 },
    #[error("invalid mesh: {0}")]
    InvalidMesh(&'static str),
    #[error("singular element {element} (det {det:e})")]
    SingularElement { element: usize, det: f64 },
    #[error("unsupported quadrature degree {0} (max 12)")]
    UnsupportedDegree(usize),
    #[error("unsupported polynomial degree {0} (expected 1, 2 or 3)")]
    UnsupportedPolynomialDegree(usize),
    #[error("insufficient resolution: only {usable} usable levels")]
    InsufficientResolution { usable: usize },
    #[error("singular system: {0}")]
    SingularSystem(&'static str),
    #[error("iterative solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("no manufactured exact solution available")]
    MissingExact,
    #[error("errors at or below the round-off floor; rates undefined")]
    DegenerateErrors,
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}
