use thiserror::Error;

/// Errors raised by the library. Every variant is an input problem; the
/// algorithms themselves never fail once their preconditions hold.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown member id {id} (network has {n} members)")]
    UnknownMember { id: usize, n: usize },

    #[error("not a linear order: {0}")]
    NotLinearOrder(String),

    #[error("not a bijection: {0}")]
    NotBijection(String),

    #[error("subset must be non-empty")]
    EmptySubset,

    #[error("subset {mask:#x} does not fit a network of {n} members")]
    SubsetOutOfRange { mask: u64, n: usize },

    #[error("networks have {0} and {1} members")]
    GroundSetMismatch(usize, usize),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what} needs {n} members but the cap is {cap}; pass the force flag to run anyway")]
    TooLarge { what: &'static str, n: usize, cap: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
