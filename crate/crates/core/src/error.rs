use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("pair is not critical: residual {residual:.3e} exceeds tolerance {tol:.1e}; F(0) = {matrix:?}")]
    NotCritical {
        residual: f64,
        tol: f64,
        matrix: [[f64; 2]; 2],
    },

    #[error("even/odd products differ: even {even}, odd {odd}")]
    ProductMismatch { even: f64, odd: f64 },

    #[error("singular: {0}")]
    Singular(String),

    #[error("no convergence: {message}")]
    NoConvergence {
        message: String,
        series: Option<Box<crate::turan::TuranSeries>>,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn no_convergence(message: impl Into<String>) -> Self {
        Error::NoConvergence {
            message: message.into(),
            series: None,
        }
    }

    /// True for failures of an iterative method, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NoConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
