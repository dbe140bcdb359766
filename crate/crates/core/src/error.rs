use thiserror::Error;

/// Errors produced by the certification toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("distribution has zero variance")]
    ZeroVariance,

    #[error("distribution is not standardized (mean {mean:e}, variance {variance})")]
    NotStandardized { mean: f64, variance: f64 },

    #[error("distribution is not centered (mean {0:e})")]
    NotCentered(f64),

    #[error("infeasible three-point law: a={a}, b={b}, c={c} (need ac >= 1, bc <= 1, a > b >= 0, c > 0)")]
    InfeasibleThreePoint { a: f64, b: f64, c: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge on [{a}, {b}]: error estimate {error:e} exceeds tolerance {tol:e}")]
    Quadrature { a: f64, b: f64, error: f64, tol: f64 },

    #[error("certification failed at eps={epsilon}: bound {bound} leaves no room below target {target}")]
    CertificationFailed { epsilon: f64, bound: f64, target: f64 },

    #[error("regime check failed: {0}")]
    Regime(String),
}

pub type Result<T> = std::result::Result<T, Error>;
