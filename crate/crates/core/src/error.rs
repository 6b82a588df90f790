use thiserror::Error;

/// Errors raised by the crack operator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrackError {
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("evaluation point {at} coincides with a pole of the field")]
    Pole { at: f64 },

    #[error("integral does not converge: {0}")]
    NotIntegrable(String),

    #[error("inversion not applicable: {0}")]
    Inversion(String),

    #[error("extrapolation did not converge: {0}")]
    NonConvergent(String),

    #[error("linear system is ill-conditioned (condition estimate {estimate:.3e})")]
    IllConditioned { estimate: f64 },

    #[error("singular matrix in dense solve")]
    Singular,

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

impl CrackError {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        CrackError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CrackError>;
