use thiserror::Error;

/// Errors produced by the exact kernel and the numeric layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Input text does not conform to the expression grammar.
    #[error("syntax error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    /// Numeric evaluation outside the real domain of the expression
    /// (fractional powers need x > 0, negative powers need x != 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation left the exact monomial ring (irrational root,
    /// logarithmic antiderivative, negative power of alpha or hbar).
    #[error("not representable in the exact ring: {0}")]
    Exactness(String),

    /// A structural precondition was violated (order mismatch, empty
    /// ansatz, grid too small for the stencil, ...).
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
