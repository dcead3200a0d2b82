use thiserror::Error;

/// Validation errors raised when constructing domain values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chi must be ≥ 0 (got {0})")]
    NegativeChi(f64),
    #[error("parameters must be finite (chi = {chi}, kappa = {kappa})")]
    NonFiniteParams { chi: f64, kappa: f64 },
    #[error("pendulum radius must be ≥ 0 (got {0})")]
    NegativeRadius(f64),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
