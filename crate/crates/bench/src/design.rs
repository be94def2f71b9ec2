//! Design runs with per-iteration checkpoints and design-SNR search.

use std::path::Path;

use maqd_core::code::LiftedCode;
use maqd_core::design::{design_full, DecoderDesign, TrainingReport};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::write_atomic;
use crate::stats::bsc_capacity;
use crate::{BenchError, Result};

#[derive(Debug, Clone)]
pub struct DesignRun {
    pub design: DecoderDesign,
    pub report: TrainingReport,
    /// `(design Eb/N0, final training MI)` of every design attempted.
    pub attempts: Vec<(f64, f64)>,
}

/// One design at a fixed SNR, checkpointing every finished iteration.
pub fn design_at(
    config: &ExperimentConfig,
    code: &LiftedCode,
    ebn0: f64,
    checkpoint: Option<&Path>,
) -> Result<(DecoderDesign, TrainingReport)> {
    let dc = config.design_config(ebn0)?;
    let mut save = |d: &DecoderDesign| -> maqd_core::Result<()> {
        log::debug!(
            "design at {ebn0:.3} dB: iteration {} done",
            d.iterations.len()
        );
        if let Some(path) = checkpoint {
            write_atomic(path, &d.to_text())
                .map_err(|e| maqd_core::Error::Config(e.to_string()))?;
        }
        Ok(())
    };
    Ok(design_full(code, &dc, &mut save)?)
}

/// Designs at the configured SNR, or bisects for the lowest design SNR whose
/// final training MI reaches `target_mi`.
pub fn run_design(config: &ExperimentConfig, checkpoint: Option<&Path>) -> Result<DesignRun> {
    let code = config.code.build()?;
    if let Some(ebn0) = config.design.ebn0 {
        let (design, report) = design_at(config, &code, ebn0, checkpoint)?;
        let mi = report.final_mutual_information();
        return Ok(DesignRun {
            design,
            report,
            attempts: vec![(ebn0, mi)],
        });
    }
    let target = config.design.target_mi;
    let [mut lo, mut hi] = config.design.search;
    let mut attempts = Vec::new();
    let mut attempt = |e: f64| -> Result<(DecoderDesign, TrainingReport, bool)> {
        let (d, r) = design_at(config, &code, e, checkpoint)?;
        let mi = r.final_mutual_information();
        log::info!("design Eb/N0 {e:.4} dB: final training MI {mi:.6}");
        attempts.push((e, mi));
        Ok((d, r, mi >= target))
    };
    let (mut best_design, mut best_report, ok) = attempt(hi)?;
    if !ok {
        return Err(BenchError::Search(format!(
            "MI {target} not reached even at {hi} dB"
        )));
    }
    let (d, r, ok) = attempt(lo)?;
    if ok {
        best_design = d;
        best_report = r;
    } else {
        while hi - lo > config.design.tolerance {
            let mid = 0.5 * (lo + hi);
            let (d, r, ok) = attempt(mid)?;
            if ok {
                hi = mid;
                best_design = d;
                best_report = r;
            } else {
                lo = mid;
            }
        }
    }
    if let Some(path) = checkpoint {
        write_atomic(path, &best_design.to_text())?;
    }
    Ok(DesignRun {
        design: best_design,
        report: best_report,
        attempts,
    })
}

/// Per-iteration training statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingRecord {
    pub iteration: usize,
    pub ber: f64,
    pub mi: f64,
    pub preserved: f64,
}

pub fn training_records(report: &TrainingReport) -> Vec<TrainingRecord> {
    report
        .bit_error_rate
        .iter()
        .zip(&report.preserved)
        .enumerate()
        .map(|(i, (&ber, &preserved))| TrainingRecord {
            iteration: i + 1,
            ber,
            mi: bsc_capacity(ber),
            preserved,
        })
        .collect()
}
