use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("cell scheme failure: {0}")]
    SchemeFailure(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
