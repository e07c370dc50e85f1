use thiserror::Error;

use crate::sequence::dsl::ParseError;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter fell outside the domain of the operation it was passed to.
    #[error("invalid {name}: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error(transparent)]
    Parse(#[from] ParseError),

    /// Every point of an order scan was numerically zero, so no slope exists.
    #[error("degenerate fit: all {points} infidelities are below {floor:e}")]
    DegenerateFit { points: usize, floor: f64 },

    /// The magic-angle ESEEM ratio diverges for a perfect refocusing pulse.
    #[error("ratio diverges: the 2-delta component vanishes for theta_eps = 0")]
    Divergent,

    #[error("signal mismatch: {0}")]
    SignalMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain(name, format!("{value} is not finite")))
    }
}
