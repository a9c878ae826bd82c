use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid order parameter: {0}")]
    InvalidOrder(String),

    #[error("index out of range: {0}")]
    IndexError(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("order mismatch: expected s = {expected}, got s = {got}")]
    OrderMismatch { expected: f64, got: f64 },

    #[error("pulse conditions unsatisfiable: {0}")]
    PulseConditions(String),

    #[error("tomogram set rejected: {0}")]
    TomogramSet(String),

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error("invalid noise channel: {0}")]
    InvalidNoise(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
