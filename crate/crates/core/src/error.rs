use thiserror::Error;

use crate::system::ClassificationTag;

/// Errors raised by the solver and the verification machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The coefficients do not satisfy hypothesis (H).
    #[error("coefficients are not in the supported regime: {}", .0.describe())]
    Classification(ClassificationTag),

    /// A caller-side precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// `slope_map` evaluated where `alpha * z + beta` vanishes.
    #[error("slope map has a pole at z = {0}")]
    Pole(f64),

    /// The adaptive controller could not meet the requested tolerances.
    #[error("step failure at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    /// The edge regularization cap became active along a computed trajectory.
    #[error("edge regularization cap active at t = {t} (gamma*x + z = {value}, cap = {cap})")]
    CapActivated { t: f64, value: f64, cap: f64 },

    /// A numerically computed quantity contradicts a closed-form identity.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
