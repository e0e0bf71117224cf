use thiserror::Error;

/// Errors raised by the model operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the operation (e.g. `sigma2 <= 0`).
    #[error("parameter domain error: {0}")]
    ParameterDomain(String),

    /// The coefficients admit no stationary solution (`D <= 0`).
    #[error("nonstationary parameters: D = {d} (a stationary solution requires D > 0)")]
    Nonstationary { d: f64 },

    /// The operation is defined only for causal coefficients.
    #[error("parameters are not causal (factors {factors:?}); {hint}")]
    NonCausal {
        factors: [f64; 4],
        hint: &'static str,
    },

    /// A requested lag or index lies outside the available window.
    #[error("out of range: {0}")]
    Range(String),

    /// A moment-inversion denominator is too close to zero.
    #[error("ill-conditioned autocovariance: {0}")]
    IllConditioned(String),

    /// The autocovariance values are not realizable by a stationary model.
    #[error("inconsistent autocovariance: {0}")]
    InconsistentAcf(String),

    /// A truncation or burn-in target could not be met within the configured cap.
    #[error("truncation failed: {0}")]
    Truncation(String),

    /// Malformed input data (files, grids).
    #[error("invalid input: {0}")]
    Input(String),

    /// A mathematical invariant that must hold was violated.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Errors that describe the model or its data (as opposed to internal failures).
    pub fn is_domain(&self) -> bool {
        !matches!(self, Error::Internal(_))
    }
}
