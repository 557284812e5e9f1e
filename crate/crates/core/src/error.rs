use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("gaussian tail at the support edge is {tail:e}, above 1e-12 of the amplitude")]
    TailTooLarge { tail: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("integrator step underflow at x = {x}")]
    NumericFailure { x: f64 },

    #[error("jost solution vanishes near x = {x} (k = {k_re}{k_im:+}i)")]
    PoleProximity { x: f64, k_re: f64, k_im: f64 },

    #[error("riccati trajectory blew up at x = {x}")]
    PoleCrossing { x: f64 },

    #[error("resonance near k = {k}")]
    ResonanceProximity { k: f64 },

    #[error("tail does not decay: estimated tail {tail:e} with uncertainty {uncertainty:e}")]
    TailNotDecaying { tail: f64, uncertainty: f64 },

    #[error("least-squares fit is ill-conditioned (condition number {condition:e})")]
    FitConditioning { condition: f64 },

    #[error("could not fix the branch of g_t: imaginary part {imag:e} at the reference point")]
    BranchFix { imag: f64 },

    #[error("blaschke factor evaluated at a pole or zero")]
    EvaluationAtPole,

    #[error("atom at the singular point x = {x}")]
    AtomAtSingularity { x: f64 },

    #[error("quadrature did not converge: error estimate {error:e} after {intervals} intervals")]
    QuadratureFailure { error: f64, intervals: usize },

    #[error("integrand is not finite on [{a}, {b}]")]
    NonFiniteIntegrand { a: f64, b: f64 },

    #[error("negative or zero spectral density ratio near k = {k}")]
    NonpositiveDensity { k: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
