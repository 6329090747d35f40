use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not a smooth complete surface: {0}")]
    NotSmoothComplete(String),
    #[error("not a minus-one curve: {0}")]
    NotMinusOne(String),
    #[error("not a toric system: {0}")]
    NotToricSystem(String),
    #[error("fiber not toric: {0}")]
    FiberNotToric(String),
    #[error("invalid degeneration diagram: {0}")]
    InvalidDiagram(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("search bound too small: {0}")]
    BoundTooSmall(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
