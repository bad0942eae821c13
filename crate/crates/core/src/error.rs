use thiserror::Error;

use crate::places::Place;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("argument must be nonzero")]
    Zero,
    #[error("singular matrix")]
    SingularMatrix,
    #[error("gram matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("pole at s = {0}")]
    Pole(String),
    #[error("capacity exceeded: more than {limit} items")]
    Capacity { limit: usize },
    #[error("section vanishes at the point at place {0}")]
    ZeroSectionAtPlace(Place),
    #[error("twist component at place {0} is not diagonal")]
    NotDiagonal(Place),
    #[error("section is not a monomial")]
    NotMonomial,
    #[error("degenerate least-squares design: {0}")]
    DegenerateDesign(String),
    #[error("quadrature did not converge (achieved {achieved:e})")]
    Quadrature { achieved: f64 },
    #[error("special function did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Stable kebab-case tag for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::NotPrime(_) => "not-prime",
            Error::Zero => "zero",
            Error::SingularMatrix => "singular-matrix",
            Error::NotPositiveDefinite => "not-positive-definite",
            Error::Pole(_) => "pole",
            Error::Capacity { .. } => "capacity",
            Error::ZeroSectionAtPlace(_) => "zero-section",
            Error::NotDiagonal(_) => "not-diagonal",
            Error::NotMonomial => "not-monomial",
            Error::DegenerateDesign(_) => "degenerate-design",
            Error::Quadrature { .. } => "quadrature",
            Error::NoConvergence(_) => "no-convergence",
        }
    }

    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}
