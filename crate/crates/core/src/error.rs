use thiserror::Error;

/// Errors raised by kernel evaluation, quadrature and verification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("principal power undefined on the branch cut at {re} + {im}i")]
    BranchCut { re: f64, im: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error(
        "quadrature did not converge: estimate {value_re} + {value_im}i, \
         error estimate {error_estimate:e} after {evals} evaluations"
    )]
    Convergence {
        value_re: f64,
        value_im: f64,
        error_estimate: f64,
        evals: usize,
    },

    #[error("degenerate sampler: {0}")]
    DegenerateSampler(String),

    #[error("inadmissible test profile: {0}")]
    Inadmissible(String),

    /// A condition the mathematics guarantees was violated; indicates a bug.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
