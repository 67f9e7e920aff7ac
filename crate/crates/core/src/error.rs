use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("flag lies outside the flag polytope (distance {distance:.3e} > tol {tol:.3e})")]
    InfeasibleFlag { distance: f64, tol: f64 },

    #[error("point lies in the target set; no proximal normal")]
    NoNormal,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("action {action} was never explored in the block")]
    InsufficientExploration { action: usize },

    #[error("exclusion witness has non-positive margin {margin:.3e}")]
    InvalidWitness { margin: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("{} (line {}, column {})", e, e.line(), e.column()))
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
