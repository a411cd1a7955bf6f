use thiserror::Error;

/// Errors raised by the analysis library.
///
/// Variants are grouped by how a caller should react: `Domain` and `Usage`
/// mean the request itself was malformed, while the remaining variants are
/// analysis failures on well-formed input.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("degenerate dichotomization: {0}")]
    Degenerate(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("fit did not converge after {iterations} iterations (last log-likelihood {last_loglik})")]
    NonConvergence { iterations: usize, last_loglik: f64, trace: Vec<f64> },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("bootstrap error: {0}")]
    Bootstrap(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by a malformed request rather than by the data.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Usage(_) | Error::Graph(_) | Error::Parse(_) | Error::Scenario(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
