use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("run failed at snr {snr_db} dB, {point}, seed index {seed_index}: {source}")]
    Run {
        snr_db: f64,
        point: String,
        seed_index: usize,
        #[source]
        source: ale_core::Error,
    },

    #[error(transparent)]
    Core(#[from] ale_core::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T> = std::result::Result<T, BenchError>;

pub(crate) fn config_err<T>(key: impl Into<String>, message: impl Into<String>) -> Result<T> {
    Err(BenchError::Config { key: key.into(), message: message.into() })
}
