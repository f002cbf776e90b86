use thiserror::Error;

/// Errors raised by the probability, graph, walk and reduction code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Inputs do not fit together (mismatched domains, lengths, shapes).
    #[error("structural error: {0}")]
    Structural(String),
    /// A numeric parameter lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition of the operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// The request would exceed a named enumeration or size ceiling.
    #[error("resource limit exceeded: {what} (budget {budget})")]
    Resource { what: String, budget: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
