use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The bench description is inconsistent (M = 0, duplicate labels, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A correlation request cannot be evaluated against the bench.
    #[error("request error: {0}")]
    Request(String),

    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A trace does not have the structure the analysis needs.
    #[error("analysis error: {0}")]
    Analysis(String),
}
