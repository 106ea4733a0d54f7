use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A numeric argument is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A named model, kernel or option could not be resolved, or its
    /// parameters violate the model assumptions.
    #[error("configuration error: {0}")]
    Config(String),

    /// Quadrature or Fourier inversion did not reach the requested accuracy.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("simulation diverged at step {step} (state {state})")]
    Simulation { step: usize, state: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
