//! Benchmark harness for the separation library: declarative experiment
//! configs, seeded Monte-Carlo sweeps emitting CSV and SVG artifacts, and
//! invariant self-tests.

pub mod config;
pub mod record;
pub mod runner;
pub mod seed;
pub mod summary;
pub mod svg;
pub mod sweep;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    /// Config problems; each string names the key and the line it came from.
    #[error("configuration invalid:\n{}", .0.join("\n"))]
    Validation(Vec<String>),
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Validation(_) => 1,
            BenchError::Runtime(_) => 2,
        }
    }
}

impl From<sparseica::Error> for BenchError {
    fn from(e: sparseica::Error) -> Self {
        BenchError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Runtime(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
