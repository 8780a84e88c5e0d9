use thiserror::Error;

/// Errors raised by the simulation, encoding and detection routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A problem size exceeded the cap of the routine that received it.
    #[error("{what} = {got} exceeds the cap of {cap} ({reason})")]
    SizeCap {
        what: &'static str,
        got: usize,
        cap: usize,
        reason: &'static str,
    },

    /// Two sequences that must agree in length did not.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// An argument was outside its domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The spectral gap vanished, so no runtime bound exists.
    #[error("minimum gap is zero; runtime bound is undefined")]
    DegenerateGap,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn dimension(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            actual,
        }
    }
}
