use thiserror::Error;

/// Errors raised by the physical models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Two charge carriers are closer than their regularization spheres allow.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A point or tip lies outside the region where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The linear solve did not reach the requested residual.
    #[error("solver failed: relative residual {residual:.3e} exceeds {tolerance:.1e}")]
    Solver { residual: f64, tolerance: f64 },

    /// Time step exceeds the stability guard of the droplet integrator.
    #[error("time step {dt:.3e} s exceeds stability limit {limit:.3e} s (tau/10)")]
    StepSize { dt: f64, limit: f64 },

    /// An operation was called outside its precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Spacing search bracket does not isolate a single predicate transition.
    #[error("invalid bracket: {reason}; sampled (spacing m, predicate) = {samples:?}")]
    Bracket { reason: String, samples: Vec<(f64, bool)> },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics (solver residual, step size,
    /// spacing bracket, broken internal contract) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Solver { .. } | Error::StepSize { .. } | Error::Bracket { .. } | Error::Contract(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {value}")))
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be >= 0, got {value}")))
    }
}
