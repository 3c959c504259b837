use thiserror::Error;

/// Errors raised by the model, solver, bound and pricing layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("model has no jump part")]
    NoJumpPart,

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("quadrature did not converge on {piece} (error estimate {estimate:.3e})")]
    Quadrature { piece: String, estimate: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("models are not equivalent: {0}")]
    NonEquivalent(String),

    #[error("integrability condition fails: {0}")]
    Integrability(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("estimation failed: {0}")]
    Estimation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
