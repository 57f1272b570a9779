use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("division by non-unit scalar {0}")]
    NonUnitDivision(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("value tag mismatch: {0}")]
    TagMismatch(String),
    #[error("{0}")]
    NotNilpotent(String),
    #[error("connection routes disagree: {0}")]
    RouteMismatch(String),
    #[error("not ∂̄-closed: {0}")]
    NotClosed(String),
    #[error("no polynomial chart for model {0:?}")]
    NoChart(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degree mismatch: {0}")]
    Degree(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
