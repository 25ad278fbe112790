use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("absolute moment of order {order} diverges for stability index {alpha}")]
    DivergingMoment { order: f64, alpha: f64 },

    #[error("convergence hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("posteriors were built from different prior draw sets")]
    ReferenceMismatch,

    #[error("data vector norm {norm} exceeds the declared radius {radius}")]
    RadiusExceeded { norm: f64, radius: f64 },

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("importance weights degenerate: top two log-weights differ by {gap:.3e}")]
    DegenerateWeights { gap: f64 },

    #[error("no convergence within {sweeps} sweeps (best objective {objective:.6e})")]
    IterationLimit {
        sweeps: usize,
        objective: f64,
        best: Vec<f64>,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
