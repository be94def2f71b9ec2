//! Experiment driver for quantized LDPC decoder designs: design runs with
//! design-SNR search, FER sweeps with Clopper-Pearson intervals, mutual
//! information tracking and design inspection.

pub mod config;
pub mod design;
mod error;
pub mod inspect;
pub mod output;
pub mod sim;
pub mod stats;

pub use config::{DecoderKind, ExperimentConfig};
pub use error::{BenchError, Result};

/// Environment variable holding the worker thread count.
pub const WORKERS_ENV: &str = "MAQD_WORKERS";

/// Worker count from [`WORKERS_ENV`], `None` if unset or empty.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| {
                BenchError::Config(format!("{WORKERS_ENV}={v} is not a positive integer"))
            }),
        _ => Ok(None),
    }
}
