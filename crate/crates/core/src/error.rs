use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("model violation: {0}")]
    ModelViolation(String),
    #[error("degenerate policy: {0}")]
    DegeneratePolicy(String),
    #[error(
        "undefined rate at t = {t}: no analyses recorded ({series_reaching} series reached t)"
    )]
    UndefinedRate { t: u32, series_reaching: u64 },
    #[error("resource limit: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
