use thiserror::Error;

use crate::geometry::CausalType;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("variable u{index} at position {position} is out of range for arity {arity}")]
    VariableOutOfRange {
        index: usize,
        arity: usize,
        position: usize,
    },

    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("domain error in `{subterm}`: {message}")]
    Domain { subterm: String, message: String },

    #[error("{quantity} is undefined at light-like point {point:?}")]
    LightLike {
        quantity: &'static str,
        point: Vec<f64>,
    },

    #[error("{quantity} requires a space-like point, {point:?} is {causal}")]
    NotSpaceLike {
        quantity: &'static str,
        point: Vec<f64>,
        causal: CausalType,
    },

    #[error("domain is not of uniform causal type: {found} point at {point:?} in a {expected} domain")]
    MixedCausalType {
        expected: CausalType,
        found: CausalType,
        point: Vec<f64>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gradient bound is unbounded: {0}")]
    UnboundedFit(String),

    #[error("hypothesis fails at {point:?}: {detail}")]
    Hypothesis { point: Vec<f64>, detail: String },

    #[error("causal breakdown at grid node ({i}, {j}): discrete gradient left the space-like guard")]
    CausalBreakdown { i: usize, j: usize },

    #[error("Newton iteration did not converge, residual history {history:?}")]
    NonConvergence { history: Vec<f64> },

    #[error("singular linear system at row {0}")]
    Singular(usize),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(subterm: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Domain {
            subterm: subterm.into(),
            message: message.into(),
        }
    }

    /// Whether the error reports a failed theorem hypothesis rather than bad input.
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(self, Error::UnboundedFit(_) | Error::Hypothesis { .. })
    }

    /// Location attached to the error, if any.
    pub fn location(&self) -> Option<Vec<f64>> {
        match self {
            Error::LightLike { point, .. }
            | Error::NotSpaceLike { point, .. }
            | Error::MixedCausalType { point, .. }
            | Error::Hypothesis { point, .. } => Some(point.clone()),
            Error::Syntax { position, .. } | Error::VariableOutOfRange { position, .. } => {
                Some(vec![*position as f64])
            }
            Error::CausalBreakdown { i, j } => Some(vec![*i as f64, *j as f64]),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
