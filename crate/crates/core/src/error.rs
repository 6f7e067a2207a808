use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("polynomial vanishes identically modulo {0}")]
    DegeneratePolynomial(u64),

    #[error("{d} has no inverse modulo {p}")]
    NoInverse { d: u64, p: u64 },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("semantic error: {0}")]
    Semantic(String),

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("spectrum bounds differ ({0} vs {1})")]
    BoundMismatch(u64, u64),

    #[error("while evaluating in Z_{modulus}: {source}")]
    AtModulus {
        modulus: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("engines disagree in Z_{modulus}: naive {naive}, fast {fast}")]
    EngineMismatch { modulus: u64, naive: bool, fast: bool },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Strips modulus annotations to expose the underlying cause.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtModulus { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
