use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("value does not fit the serialized integer range: {0}")]
    Overflow(String),

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("vector {0} lies outside the declared cone")]
    OutOfCone(String),

    /// An arrival has no reserved slot left; the advice does not describe the sequence.
    #[error("no reserved slot for {0}; advice does not match the sequence")]
    NoMatchingSlot(String),

    #[error("malformed advice tape: {0}")]
    MalformedTape(String),

    #[error("count {count} exceeds the field range for n = {n}")]
    CountTooLarge { count: u64, n: u64 },

    #[error("strategy broke feasibility: {0}")]
    Infeasible(String),

    #[error("node budget exhausted; optimum lies in [{lower}, {upper}]")]
    BudgetExhausted { lower: usize, upper: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Overflow(_) => "overflow",
            Error::InvalidVector(_) => "invalid-vector",
            Error::InvalidParams(_) => "invalid-params",
            Error::OutOfCone(_) => "out-of-cone",
            Error::NoMatchingSlot(_) => "no-matching-slot",
            Error::MalformedTape(_) => "malformed-tape",
            Error::CountTooLarge { .. } => "count-too-large",
            Error::Infeasible(_) => "infeasible",
            Error::BudgetExhausted { .. } => "budget-exhausted",
            Error::Precondition(_) => "precondition",
            Error::Io(_) => "io",
        }
    }
}
