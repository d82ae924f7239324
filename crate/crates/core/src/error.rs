use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the numerical core.
///
/// Solver convergence failures are reported through
/// [`crate::polarizer::SolveError`] instead, since they carry the best
/// iterate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {n} samples (need at least {min})")]
    InvalidGrid { n: usize, min: usize },
    #[error("grid mismatch: {left} vs {right} samples")]
    GridMismatch { left: usize, right: usize },
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error("transfer probability {value} at index {index} outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("angle list is empty")]
    EmptyAngles,
    #[error("unphysical Stokes vector (I = {intensity}, polarized part = {polarized})")]
    UnphysicalStokes { intensity: f64, polarized: f64 },
    #[error("correlation {value} outside [-1, 1]")]
    CorrelationOutOfRange { value: f64 },
    #[error("no events recorded")]
    NoEvents,
    #[error("negative evolution time {t}: evolution only moves states forward")]
    BackwardEvolution { t: f64 },
    #[error("impact parameter undefined for zero mean wave vector")]
    UndefinedImpactParameter,
    #[error("spectral weight {weight:e} below the energy cutoff makes H^-1 singular")]
    SingularInverse { weight: f64 },
    #[error("tail weight {weight:e} on the top basis states exceeds {threshold:e}")]
    TruncationTail { weight: f64, threshold: f64 },
    #[error("phase undefined: |<C> + i<S>| = {radius} below {min}")]
    UndefinedPhase { radius: f64, min: f64 },
}
