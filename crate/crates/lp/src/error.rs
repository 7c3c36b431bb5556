use thiserror::Error;

pub type Result<T> = std::result::Result<T, LpError>;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Core(#[from] ranking_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("solution is missing values for {} variable(s), first: {}", .0.len(), .0[0])]
    IncompleteSolution(Vec<String>),
    #[error("unknown variable `{0}` in solution")]
    UnknownVariable(String),
    #[error("numerical stall: {0}; retry with the Bland pivoting rule")]
    Stall(String),
}

impl LpError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        LpError::Parse {
            line,
            message: message.into(),
        }
    }
}
