use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure classes. The CLI maps these onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parse,
    Precondition,
    Numeric,
}

/// The fit step a failure originated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStep {
    Crossovers,
    Temperature,
    MediumExponent,
    HighExponent,
}

impl fmt::Display for FitStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FitStep::Crossovers => "crossover detection",
            FitStep::Temperature => "temperature fit",
            FitStep::MediumExponent => "medium-class exponent fit",
            FitStep::HighExponent => "high-class exponent fit",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("income {m} lies below the lower bound of the domain {m_init}")]
    OutOfDomain { m: f64, m_init: f64 },

    #[error(
        "quadrature did not converge: estimated error {achieved:e} exceeds requested {requested:e}"
    )]
    Quadrature { achieved: f64, requested: f64 },

    #[error("{0}")]
    Precondition(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{step}: {source}")]
    Fit {
        step: FitStep,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }

    pub(crate) fn in_step(self, step: FitStep) -> Self {
        Error::Fit {
            step,
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse(_) | Error::Io(_) => ErrorClass::Parse,
            Error::InvalidParameter { .. } | Error::OutOfDomain { .. } | Error::Precondition(_) => {
                ErrorClass::Precondition
            }
            Error::Quadrature { .. } | Error::Numeric(_) => ErrorClass::Numeric,
            Error::Fit { source, .. } => source.class(),
        }
    }
}
