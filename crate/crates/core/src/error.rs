use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),
    #[error("theta integrand does not vanish at sin(2 theta) = 0 (residual {0:e})")]
    Singularity(f64),
    #[error("degenerate endpoint: {0}")]
    DegenerateEndpoint(String),
    #[error("degenerate masses: {0}")]
    DegenerateMass(String),
}

pub type Result<T> = std::result::Result<T, Error>;
