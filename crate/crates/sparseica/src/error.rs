use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("rank deficiency at eigenvalue index {index}: {detail}")]
    RankDeficient { index: usize, detail: String },
    #[error("degenerate demixing configuration: {0}")]
    DegenerateDemixing(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("entropy bound table construction failed: {0}")]
    TableConstruction(String),
    #[error("entropy estimation failed: {0}")]
    Estimation(String),
    #[error("sample not standardized: {0}")]
    Standardization(String),
    #[error("data generation failed: {0}")]
    Generation(String),
    #[error("metric error: {0}")]
    Metric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
