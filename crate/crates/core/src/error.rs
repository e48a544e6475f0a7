use thiserror::Error;

/// Errors produced by chart, field and connection operations.
#[derive(Debug, Clone, Error)]
pub enum GeomError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },

    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },

    #[error("point does not assign a value to coordinate `{0}`")]
    MissingCoordinate(String),

    #[error("chart mismatch: expected `{expected}`, got `{actual}`")]
    ChartMismatch { expected: String, actual: String },

    #[error("cometric is numerically singular at {point} (condition estimate {cond:.3e})")]
    SingularCometric { point: String, cond: f64 },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;

impl GeomError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        GeomError::Invalid(msg.into())
    }
}
