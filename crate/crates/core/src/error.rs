use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    Pole(f64),

    #[error("hypergeometric series diverges: lower parameter {param} reaches a pole at term {term}")]
    Divergence { param: f64, term: usize },

    #[error("invalid hypergeometric specification: {0}")]
    InvalidSeries(String),

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("point outside the upper hemisphere chart: {0}")]
    OutOfDomain(String),

    #[error("coordinate singularity: {0}")]
    CoordinateSingularity(String),

    #[error("quadrature not converged: estimate {value:e}, order-doubling difference {difference:e}")]
    NotConverged { value: f64, difference: f64 },

    #[error("stencil leaves the hemisphere at theta = {theta}")]
    StencilOutOfDomain { theta: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
