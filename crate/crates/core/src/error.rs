use alloc::string::String;
use core::fmt;

use crate::matlin::LinalgError;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    Linalg(LinalgError),
    /// The caller handed over something outside an operation's domain.
    InvalidInput(String),
    /// The top `m x m` block of a frame (or `A + BZ` for a chart change) is
    /// singular: the curve has left the affine chart.
    ChartBreakdown {
        t: Option<f64>,
    },
    /// `I - ZZᵀ` is singular, so the Lorentzian slope metric degenerates.
    SpacelikeBreakdown {
        t: f64,
    },
    /// A construction-time identity failed numerically.
    InvariantViolated {
        what: &'static str,
        defect: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Linalg(e) => write!(f, "{e}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::ChartBreakdown { t: Some(t) } => {
                write!(f, "curve leaves the affine chart at t = {t}")
            }
            Error::ChartBreakdown { t: None } => write!(f, "frame is outside the affine chart"),
            Error::SpacelikeBreakdown { t } => {
                write!(f, "I - ZZᵀ is singular at t = {t}")
            }
            Error::InvariantViolated { what, defect } => {
                write!(f, "{what} violated (defect {defect:e})")
            }
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::Linalg(e) => Some(e),
            _ => None,
        }
    }
}

impl From<LinalgError> for Error {
    fn from(e: LinalgError) -> Self {
        Error::Linalg(e)
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
