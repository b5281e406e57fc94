use std::fmt;

use thiserror::Error;

/// A single broken parameter constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub constraint: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            constraint: constraint.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<Violation>),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step outcome inconsistent with model: {0}")]
    InconsistentOutcome(String),

    #[error("no root of the drift equation in gamma_d bracket [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} exceeds {tolerance:e}")]
    Refinement { estimate: f64, tolerance: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(what))
    }
}
