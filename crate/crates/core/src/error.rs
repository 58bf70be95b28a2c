//! Error type shared by every pricing routine in the crate.

use thiserror::Error;

/// Failure modes of the survival engine, pricers and the Monte Carlo oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    /// An argument lies outside the mathematical domain of a function.
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    /// A model or contract parameter violates its invariant.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    /// Inputs are valid but degenerate, e.g. both firms start on their barriers.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An operation's precondition does not hold for the supplied model.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The eigenfunction series hit its term cap while terms were still large.
    #[error("series did not converge after {terms} terms (last |term| = {last_term:e})")]
    NonConvergence { terms: usize, last_term: f64 },

    /// A quadrature sample or intermediate produced NaN or infinity.
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, PricingError>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: impl Into<String>) -> PricingError {
    PricingError::InvalidParameter {
        name,
        value,
        reason: reason.into(),
    }
}
