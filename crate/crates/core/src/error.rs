use thiserror::Error;

/// Failures while evaluating a function numerically.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge after {panels} panels (error estimate {estimate:e})")]
    NoConvergence { panels: usize, estimate: f64 },
    #[error("no value assigned to unknown `{0}`")]
    Unassigned(String),
    #[error("no value for parameter `{0}`")]
    UnknownParam(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("operator `{op}` has no twist: k(a) = 0 or is undefined at a = {a}")]
    MissingTwist { op: String, a: String },
    #[error("bracket nesting depth {depth} exceeds the cap of {cap}")]
    DepthCap { depth: usize, cap: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Invalid(String),
}
