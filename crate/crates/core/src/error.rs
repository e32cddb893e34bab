use thiserror::Error;

/// Errors raised by constructors, certification and the solver.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the range where a construction is defined.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A computation produced a non-finite or otherwise unusable value.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The solver state became non-finite.
    #[error("non-finite state at step {step} (t = {t}) in cell {cell}")]
    NonFiniteState { step: usize, t: f64, cell: usize },

    /// The discrete maximum principle was violated during a step.
    #[error("maximum principle violated at step {step}, cell {cell}: {value} outside [{lo}, {hi}]")]
    MaximumPrinciple {
        step: usize,
        cell: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// A pasted field jumps across the interface.
    #[error("pasted field is discontinuous: sampled jump {magnitude:.3e} at {location:?}")]
    Discontinuous { magnitude: f64, location: Vec<f64> },

    /// Newton iteration did not reach the requested tolerance.
    #[error("newton iteration failed after {} iterations (last residual {:.3e})", history.len(), history.last().copied().unwrap_or(f64::NAN))]
    NewtonFailed { history: Vec<f64> },

    /// Sampling found no admissible point.
    #[error("empty sample set: {0}")]
    EmptySample(String),

    /// A rasterized mask has no active cells.
    #[error("empty mask: {0}")]
    EmptyMask(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for errors caused by rejected inputs rather than numerical trouble.
    pub fn is_parameter_error(&self) -> bool {
        matches!(self, Error::Parameter(_) | Error::EmptyMask(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
