use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{op}: argument {value} outside {expected}")]
    Domain {
        op: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("series did not reach the requested tolerance within {terms} terms")]
    ConvergenceTooSlow { terms: usize },

    #[error("quadrature error estimate {estimate:e} above tolerance {tol:e} after {panels} panels")]
    ToleranceNotMet {
        estimate: f64,
        tol: f64,
        panels: usize,
    },

    #[error("{op}: cancellation loses {lost:.1} of {available} digits")]
    PrecisionLoss {
        op: &'static str,
        lost: f64,
        available: u32,
    },

    #[error("series {series}: coefficient {index} residual {residual:e} exceeds tolerance")]
    AssemblyMismatch {
        series: &'static str,
        index: usize,
        residual: f64,
    },

    #[error("extended precision needs between 16 and 10000 digits, got {0}")]
    InvalidPrecision(u32),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            op,
            value,
            expected,
        }
    }

    /// True for failures of a numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ConvergenceTooSlow { .. }
                | Error::ToleranceNotMet { .. }
                | Error::PrecisionLoss { .. }
                | Error::AssemblyMismatch { .. }
                | Error::Domain { .. }
        )
    }
}
