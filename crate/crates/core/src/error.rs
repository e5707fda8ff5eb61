use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("insufficient coefficients: need index {needed}, table ends at {available}")]
    InsufficientCoefficients { needed: usize, available: usize },
    #[error("series length must be at least 1")]
    EmptySeries,
    #[error("unsupported weight {0}")]
    UnsupportedWeight(u32),
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("cover is empty: the weights w(c) sum to zero")]
    EmptyCover,
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("tail of the d-sum not certified: estimate {estimate:e} exceeds 1% of main term {main:e}")]
    TailNotCertified { estimate: f64, main: f64 },
    #[error("serialization: {0}")]
    Serialization(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures (non-convergence, ill-conditioning) as opposed to
    /// contract violations by the caller.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature(_)
                | Error::IllConditioned(_)
                | Error::DegenerateFit(_)
                | Error::TailNotCertified { .. }
        )
    }
}
