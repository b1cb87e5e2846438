use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NsqError {
    #[error("width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("width {width} exceeds the limit of {limit}")]
    WidthLimit { width: usize, limit: usize },
    #[error("qubit {0} out of range")]
    OutOfRange(usize),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid projector set: {0}")]
    InvalidProjectors(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown particle {0}")]
    UnknownParticle(String),
    #[error("layout violation: {0}")]
    Layout(String),
    #[error("channel invalid: {0}")]
    InvalidChannel(String),
    #[error("non-Clifford step {0} met a pending frame operator")]
    NonClifford(String),
    #[error("schedule error: {0}")]
    Schedule(String),
    #[error("no syndrome record to take m4, m5 from")]
    MissingRecord,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("series truncated at order {have}, need at least {need}")]
    OrderTooLow { have: usize, need: usize },
    #[error("io error: {0}")]
    Io(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Other(String),
}

impl From<std::io::Error> for NsqError {
    fn from(e: std::io::Error) -> Self {
        NsqError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, NsqError>;
