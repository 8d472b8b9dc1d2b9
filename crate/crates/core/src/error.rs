use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("field mass {mass:e} is too small; use the configured scale floor instead")]
    VanishingMass { mass: f64 },

    #[error("ground state iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ground state iteration collapsed to zero (mass {mass:e})")]
    Collapse { mass: f64 },

    #[error("time interval [{t0}, {t1}] contains t = 0")]
    IntervalContainsZero { t0: f64, t1: f64 },

    #[error("time {0} is not a stored snapshot time")]
    NotASnapshot(f64),

    #[error("input is not radially symmetric (asymmetry {0:e})")]
    NotRadial(f64),

    #[error("frequency supports are separated by {found}, need at least {required}")]
    InsufficientSeparation { found: f64, required: f64 },

    #[error("evolution diverged at t = {0}")]
    Diverged(f64),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
