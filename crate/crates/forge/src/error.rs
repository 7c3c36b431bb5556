use thiserror::Error;

pub type Result<T> = std::result::Result<T, ForgeError>;

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error(transparent)]
    Core(#[from] ranking_core::Error),
    #[error(transparent)]
    Lp(#[from] ranking_lp::LpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("graph has no edges to match (|M*| = 0)")]
    EmptyOptimum,
    #[error("worker pool: {0}")]
    Pool(String),
}
