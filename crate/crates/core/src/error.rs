use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("spectral parameter λ = {lambda} is within tolerance of an eigenvalue")]
    NearEigenvalue { lambda: f64 },
    #[error("{what} did not converge; last bracket [{lo}, {hi}]")]
    Convergence { what: String, lo: f64, hi: f64 },
    #[error("quadrature stopped short of tolerance: estimate {estimate}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },
    #[error("s = {s} lies within {distance:e} of the pole at {pole}; use residue extraction there")]
    PoleProximity { s: f64, pole: f64, distance: f64 },
    #[error("pole at {other} lies within 2h = {} of s0 = {s0}; use a smaller step", 2.0 * .h)]
    PoleCollision { s0: f64, other: f64, h: f64 },
    #[error("needs {required} eigenvalues, above the budget of {budget}")]
    Budget { required: usize, budget: usize },
}

impl Error {
    /// True for errors caused by the caller's parameters rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::MalformedInput(_) | Error::PoleProximity { .. } | Error::PoleCollision { .. } | Error::Budget { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
