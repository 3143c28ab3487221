use thiserror::Error;

pub type Result<T> = std::result::Result<T, KmodelError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KmodelError {
    /// An argument lies outside the domain of the formula.
    #[error("{quantity} must be {requirement}, got {value:e}")]
    Domain {
        quantity: &'static str,
        requirement: &'static str,
        value: f64,
    },

    /// Inputs that are individually fine but do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    /// Invalid simulation or sampling configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical procedure did not reach its tolerance within budget.
    #[error("numerical error: {message} (achieved error estimate {error_estimate:e})")]
    Numerical { message: String, error_estimate: f64 },

    /// A root finder could not bracket or converge.
    #[error("solver error: {0}")]
    Solver(String),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

impl KmodelError {
    pub(crate) fn domain(quantity: &'static str, requirement: &'static str, value: f64) -> Self {
        KmodelError::Domain {
            quantity,
            requirement,
            value,
        }
    }
}

pub(crate) fn require_positive(quantity: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(KmodelError::domain(quantity, "positive and finite", value))
    }
}

pub(crate) fn require_non_negative(quantity: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(KmodelError::domain(quantity, "non-negative and finite", value))
    }
}
