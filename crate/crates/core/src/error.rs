use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("duplicate attribute `{0}`")]
    DuplicateAttribute(String),

    #[error("negative budget `{0}`")]
    NegativeBudget(String),

    #[error("invalid number `{0}`")]
    InvalidNumber(String),

    #[error("universe mismatch: {0}")]
    UniverseMismatch(String),

    #[error("{what} cap exceeded: {actual} > {limit}")]
    CapExceeded {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("assignment has no value for atom {0}")]
    MissingAtom(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("hypergraph has a directed cycle through vertex `{0}`")]
    Cyclic(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        Error::Syntax { pos, msg: msg.into() }
    }

    pub(crate) fn cap(what: &'static str, limit: usize, actual: usize) -> Self {
        Error::CapExceeded { what, limit, actual }
    }

    /// True for the cap-exceeded family; the CLI maps these to their own exit code.
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}
