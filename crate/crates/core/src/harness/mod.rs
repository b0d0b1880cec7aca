//! Experiment drivers behind the `vargrad-lab` binary.
//!
//! [`run`] takes a parsed [`config::ExperimentConfig`] and returns the output
//! table; nothing is written until every replicate has been reduced.

pub mod config;
pub mod experiments;
pub mod table;

use thiserror::Error;

use crate::error::Error as LibError;
use config::ExperimentConfig;
use table::CsvTable;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),

    #[error("numerical abort: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Lib(LibError),
}

impl From<LibError> for HarnessError {
    fn from(e: LibError) -> Self {
        match e {
            LibError::NonFinite(m) => HarnessError::Numerical(m),
            other => HarnessError::Lib(other),
        }
    }
}

impl HarnessError {
    /// 2 for configuration errors, 3 for numerical aborts, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Numerical(_) => 3,
            _ => 1,
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

pub fn run(config: &ExperimentConfig) -> HarnessResult<CsvTable> {
    let go = || experiments::dispatch(config);
    match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Io(std::io::Error::other(e)))?
            .install(go),
        None => go(),
    }
}
