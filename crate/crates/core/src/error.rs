use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("malformed transition matrix: {0}")]
    MalformedMatrix(String),
    #[error("shift space is empty once inessential symbols are removed")]
    EmptyShift,
    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    ResourceCap {
        what: &'static str,
        needed: u128,
        cap: u128,
    },
    #[error("chain validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("depth error: {0}")]
    Depth(String),
    #[error("degenerate potential: {0}")]
    DegeneratePotential(String),
    #[error("invalid constants: {0}")]
    InvalidConstants(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no word carries positive mass")]
    EmptySupport,
    #[error("invalid measure: {0}")]
    Measure(String),
    #[error("specification hypothesis unmet: {0}")]
    NoSpecification(String),
}

pub type Result<T> = core::result::Result<T, Error>;
