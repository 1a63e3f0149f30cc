//! Batch front end for wgmsim: job files, a bounded worker pool, result
//! manifests and plot-ready reports.

pub mod config;
pub mod jobs;
pub mod manifest;
pub mod pool;
pub mod records;
pub mod report;

use thiserror::Error;

pub use config::{parse_config, parse_config_str, resolve_workers, Job, JobKind, WORKERS_ENV};
pub use jobs::{plan_sweep, run_job};
pub use manifest::{Manifest, TaskStatus};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("missing upstream results: {0}")]
    MissingResults(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Process exit status: 0 success, 2 partial failure, 1 configuration or input error.
pub fn exit_code(result: &Result<Manifest, CliError>) -> i32 {
    match result {
        Ok(m) if m.failed() == 0 => 0,
        Ok(_) => 2,
        Err(_) => 1,
    }
}
