//! Crate-wide error type.

/// Errors produced by chart constructions and numerical operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller broke a documented precondition (dimension/degree mismatch,
    /// sign condition, empty input, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The operation is not available with the data at hand (e.g. a
    /// pushforward without an inverse map).
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Evaluation was requested inside an excluded region of the chart.
    #[error("domain error: {0}")]
    Domain(String),

    /// Closed-orbit detection ran out of time.
    #[error(
        "no orbit closure found before t = {max_time:.6e}; \
         closest return distance {min_distance:.6e} at t = {at_time:.6e}"
    )]
    PeriodNotFound {
        max_time: f64,
        min_distance: f64,
        at_time: f64,
    },

    /// The adaptive integrator could not satisfy the tolerances.
    #[error("step size underflow at t = {t:.6e} (h = {h:.6e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    /// A metric evaluation failed the positive-definiteness invariant.
    #[error("metric not positive definite: {0}")]
    NotPositiveDefinite(String),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
