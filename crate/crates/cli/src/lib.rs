//! Experiment harness: configuration, registry, refinement sweeps and
//! report emission for the positivity laboratory.
//!
//! The contract is machine-parsable: exit code 0 for a passing verdict,
//! 1 for a failing verdict, 2 for an invalid configuration or a run that
//! could not be set up. Reports are single JSON documents with a stable
//! schema version; tables go to CSV files with a one-line header. Given
//! the same (config, seed) pair the report is byte-identical up to the
//! wall-time field.

// Validation sites use `!(x > 0)` so that NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("run failed: {0}")]
    Run(#[from] poslab_core::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
