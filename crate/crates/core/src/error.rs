use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("mesh infeasible: {0}")]
    Infeasible(String),
    #[error("matrix not positive definite: {0}")]
    Indefinite(String),
    #[error("iteration cap {cap} exceeded; last bracket [{lower}, {upper}]")]
    IterationCap { cap: usize, lower: f64, upper: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
