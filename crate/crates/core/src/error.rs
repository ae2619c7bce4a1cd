use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bicomplex operand is singular (z1^2 + z2^2 = 0)")]
    SingularOperand,

    #[error("analytic second partials are not available for this field")]
    MissingAnalyticPartials,

    #[error("phase point {0} lies on the singular set of the potential")]
    SingularPhasePoint(String),

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("wavefunction value is singular at {0}")]
    SingularWavefunctionValue(String),

    #[error("energy quotient denominator {value:e} is below {threshold:e}")]
    DegenerateDenominator { value: f64, threshold: f64 },

    #[error("projected stencil around {0} reaches the singular set")]
    DegenerateProjection(String),

    #[error("operator {0} cannot be used here: {1}")]
    InvalidOperator(String, String),

    #[error("grid is empty after exclusion")]
    EmptyGrid,

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
