use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),

    #[error("empty point: dimension must be at least 1")]
    EmptyPoint,

    #[error("profile needs at least {needed} agents, got {got}")]
    TooFewAgents { needed: usize, got: usize },

    #[error("agent {agent} out of range for a profile of {n} agents")]
    AgentOutOfRange { agent: usize, n: usize },

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("invalid lottery: {0}")]
    InvalidLottery(String),

    #[error("segment distance {dist} exceeds segment length {len}")]
    SegmentTooShort { dist: f64, len: f64 },

    #[error("approximation ratio is unbounded: optimum is 0 but mechanism cost is {cost}")]
    UnboundedRatio { cost: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error in {field}: {message}")]
    Parse { field: String, message: String },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
