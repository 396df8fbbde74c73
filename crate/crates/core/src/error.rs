use thiserror::Error;

/// Errors raised by the thermodynamic models, the solver, and the diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("thermodynamic stability violated at Z = {z}: {reason}")]
    StabilityViolation { z: f64, reason: String },

    #[error("ideal-region threshold violated: Z = {z} >= Z_threshold = {threshold} at cell ({i}, {j})")]
    ThresholdViolation { z: f64, threshold: f64, i: usize, j: usize },

    #[error("invalid density profile: {0}")]
    InvalidProfile(String),

    #[error("positivity failure at cell ({i}, {j}): rho = {rho}, theta = {theta}")]
    PositivityFailure { i: usize, j: usize, rho: f64, theta: f64 },

    #[error("time step {dt} exceeds the stable bound {dt_max}")]
    CflViolation { dt: f64, dt_max: f64 },

    #[error("non-physical state: {0}")]
    NonPhysicalState(String),

    #[error("initial data out of bounds: {0}")]
    BoundsViolation(String),

    #[error("relative energy negative ({value}) at sample {index}")]
    CoercivityFailure { index: usize, value: f64 },

    #[error("consistency bound violated for term E{term} at run {run}: {detail}")]
    BoundViolation { term: usize, run: usize, detail: String },

    #[error("boundary layer unresolved: width {width} < {cells} cells of size {h}")]
    UnresolvedLayer { width: f64, cells: f64, h: f64 },

    #[error("invalid corrector thickness delta = {0} (must lie in (0, 1/2))")]
    InvalidDelta(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
