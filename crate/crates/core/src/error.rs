use thiserror::Error;

pub type Result<T> = std::result::Result<T, BeamError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeamError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("newton iteration did not converge in {iterations} iterations (residual {residual:.3e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("singular or indefinite newton matrix")]
    SingularJacobian,

    #[error("stationary solver exceeded {iterations} iterations (residual {residual:.3e})")]
    MaxIterExceeded { iterations: usize, residual: f64 },

    #[error("negative curvature {curvature:.3e} of the restoring potential at node {node}")]
    NonConvexDetected { node: usize, curvature: f64 },

    #[error("step failed at t = {t}: {source}")]
    StepFailed { t: f64, source: Box<BeamError> },

    #[error("scenario file: {0}")]
    Config(String),
}
