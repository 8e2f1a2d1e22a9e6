use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("CFL violation: dt = {dt:.3e} exceeds limit {limit:.3e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("density too close to vacuum: min = {min:.3e} <= floor {floor:.3e}")]
    VacuumProximity { min: f64, floor: f64 },
    #[error("test density 1 + eps*psi not positive: min = {min:.3e}")]
    NonpositiveTestDensity { min: f64 },
    #[error("time step dt = {dt:.3e} does not resolve fastest mode (limit {limit:.3e})")]
    UnderResolvedDt { dt: f64, limit: f64 },
    #[error("spectral tail fraction {fraction:.3e} exceeds resolution threshold {threshold:.3e}")]
    UnderResolvedField { fraction: f64, threshold: f64 },
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
