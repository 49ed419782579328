use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is missing, out of range, or inconsistent with the model.
    #[error("configuration error: {0}")]
    Config(String),

    /// A dense construction would exceed its size limit.
    #[error("size limit exceeded: {what} = {got} (max {max})")]
    SizeLimit {
        what: &'static str,
        got: usize,
        max: usize,
    },

    /// An input matrix is not a valid object of the expected kind.
    #[error("validation error: {0}")]
    Validation(String),

    /// The integrator or eigensolver could not produce a trustworthy result.
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
