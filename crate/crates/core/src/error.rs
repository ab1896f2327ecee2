//! Crate-wide error type.

/// Errors produced by construction and evaluation routines.
///
/// Boundary hits during integration are *not* errors; they are recorded on
/// the trajectory as an exit. Errors here mean the request itself was
/// malformed (bad spec, bad grid, bad dimensions) or a value left the
/// mathematical domain of an evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("time grid needs a positive duration and at least one step (t_end = {t_end}, n_steps = {n_steps})")]
    EmptyGrid { t_end: f64, n_steps: usize },

    #[error("{what} must be at least {min}, got {got}")]
    InvalidCount {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("point lies outside the open unit disk (|w| = {modulus})")]
    OutsideDisk { modulus: f64 },

    #[error("invalid Herglotz spec: {0}")]
    InvalidHerglotz(String),

    #[error("invalid driver: {0}")]
    InvalidDriver(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("evaluation grid is empty")]
    EmptyGridOfPoints,

    #[error("radius {0} is outside the open interval (0, 1)")]
    InvalidRadius(f64),

    #[error("derivative order {0} is not supported (only 0, 1, 2)")]
    UnsupportedOrder(u8),

    #[error("finite-difference step must be positive and finite, got {0}")]
    InvalidFdStep(f64),

    #[error("driver value is not unit modulus (|tau| = {0})")]
    NotUnitModulus(f64),

    #[error("generator time step must satisfy 0 < h <= {max}, got {got}")]
    StepOutOfRange { got: f64, max: f64 },

    #[error("replay data has wrong length: expected {expected} increments, got {actual}")]
    ReplayLength { expected: usize, actual: usize },

    #[error("every Monte Carlo sample exited the disk before time h")]
    AllSamplesExcluded,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
