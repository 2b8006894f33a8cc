use thiserror::Error;

/// Errors raised by the measurement, integration and construction routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("density singularity at the origin: {0}")]
    Singularity(String),

    #[error("point outside the map domain: {0}")]
    Domain(String),

    #[error("self-intersecting loop: {0}")]
    SelfIntersecting(String),

    #[error("quadrature did not reach tolerance {tol:e} (error estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("integration exceeded the step limit of {0}")]
    StepLimit(usize),

    #[error("stop event not reached: {0}")]
    NoEvent(String),

    #[error("no sign change of the shooting residual over [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("construction failed: {0}")]
    Construction(String),
}

impl Error {
    /// Validation-class errors are caller mistakes; everything else is a
    /// numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
