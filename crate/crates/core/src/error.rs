use thiserror::Error;

use crate::specialfn::LogReal;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },

    #[error("invalid indicator chi({a}, {b}): need 0 <= a < b")]
    InvalidIndicator { a: f64, b: f64 },

    #[error("support radius cannot be certified: {0}")]
    InconclusiveSupport(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("accuracy loss in {what}: cancellation factor {factor:.3e} exceeds budget")]
    AccuracyLoss { what: String, factor: f64 },

    #[error("tolerance {requested:e} not met (achieved {achieved:e}) after {evaluations} evaluations")]
    ToleranceNotMet {
        best: LogReal,
        achieved: f64,
        requested: f64,
        evaluations: usize,
    },

    #[error("symbol is not integrable against the weight: {0}")]
    NonIntegrable(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("at k = {k}: {source}")]
    AtIndex {
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("k_max = {k_max} is insufficient: tail bound {tail:e} is not below lambda = {lambda:e}; extend k_max past {k_max}")]
    InsufficientKMax { k_max: usize, tail: f64, lambda: f64 },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

impl Error {
    /// True for failures of the numerical integration layer (as opposed to
    /// bad input).
    pub fn is_quadrature_failure(&self) -> bool {
        match self {
            Error::ToleranceNotMet { .. } | Error::AccuracyLoss { .. } | Error::NonIntegrable(_) => {
                true
            }
            Error::AtIndex { source, .. } => source.is_quadrature_failure(),
            _ => false,
        }
    }
}
