//! Experiment configuration.
//!
//! A single TOML file with the sections `[code]`, `[decoder]`, `[design]`,
//! `[sweep]` and `[output]`. Every field is optional:
//!
//! ```toml
//! [code]
//! base_graph = "bg1"      # bg1, bg1-set1 or a path to a base graph asset
//! z = 32
//! rate = "1/3"
//!
//! [decoder]
//! variant = "memory"      # conventional, memory, merged-<wu>-<wp> or bp
//! msg_width = 2
//! channel_width = 5
//! llr_width = 8
//! schedule = "flooding"   # or layered
//! # max_iter defaults to 30 for flooding and 15 for layered
//! alignment = "row"
//!
//! [design]
//! # ebn0 = 1.5           # absent: bisect for the target MI
//! target_mi = 0.9999
//! search = [0.0, 4.0]
//! tolerance = 0.05
//! frames = 10000
//! seed = 0
//! inits = 500
//!
//! [sweep]
//! ebn0 = [1.0, 1.5, 2.0]
//! min_frame_errors = 100
//! max_frames = 1000000
//! batch = 256
//! seed = 1
//! early_termination = true
//! noiseless = false
//! mi_frames = 10000
//!
//! [output]
//! design = "design.txt"
//! csv = "out.csv"
//! ```

use std::path::{Path, PathBuf};

use maqd_core::code::{BaseGraph, LiftedCode, LoadOptions, Rate};
use maqd_core::design::{Alignment, DesignConfig, DesignHeader, Schedule, Variant};
use serde::Deserialize;

use crate::{BenchError, Result};

pub const FLOODING_ITERATIONS: usize = 30;
pub const LAYERED_ITERATIONS: usize = 15;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CodeSpec {
    pub base_graph: String,
    pub z: usize,
    pub rate: String,
}

impl Default for CodeSpec {
    fn default() -> Self {
        CodeSpec {
            base_graph: "bg1".into(),
            z: 32,
            rate: "1/3".into(),
        }
    }
}

impl CodeSpec {
    pub fn rate(&self) -> Result<Rate> {
        Ok(self.rate.parse()?)
    }

    /// Loads, rate-adapts and lifts the code.
    pub fn build(&self) -> Result<LiftedCode> {
        let bg = match self.base_graph.as_str() {
            "bg1" => BaseGraph::nr_bg1_set0(),
            "bg1-set1" => BaseGraph::nr_bg1_set1(),
            path => BaseGraph::load(path, LoadOptions::default())?,
        };
        let adapted = bg.rate_adapt(self.rate()?)?;
        Ok(LiftedCode::lift(&adapted, self.z)?)
    }
}

/// Decoder family: a designed quantized decoder or the floating-point
/// belief propagation baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecoderKind {
    Quantized(Variant),
    Bp,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderSpec {
    pub variant: String,
    pub msg_width: u32,
    pub channel_width: u32,
    pub llr_width: u32,
    pub schedule: String,
    pub max_iter: Option<usize>,
    pub alignment: String,
}

impl Default for DecoderSpec {
    fn default() -> Self {
        DecoderSpec {
            variant: "memory".into(),
            msg_width: 2,
            channel_width: 5,
            llr_width: 8,
            schedule: "flooding".into(),
            max_iter: None,
            alignment: "row".into(),
        }
    }
}

impl DecoderSpec {
    pub fn kind(&self) -> Result<DecoderKind> {
        match self.variant.trim() {
            "bp" => Ok(DecoderKind::Bp),
            v => Ok(DecoderKind::Quantized(v.parse()?)),
        }
    }

    pub fn schedule(&self) -> Result<Schedule> {
        Ok(self.schedule.parse()?)
    }

    pub fn alignment(&self) -> Result<Alignment> {
        Ok(self.alignment.parse()?)
    }

    pub fn max_iter(&self) -> Result<usize> {
        Ok(self.max_iter.unwrap_or(match self.schedule()? {
            Schedule::Flooding => FLOODING_ITERATIONS,
            Schedule::Layered => LAYERED_ITERATIONS,
        }))
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSpec {
    /// Fixed design SNR; `None` bisects for `target_mi`.
    pub ebn0: Option<f64>,
    pub target_mi: f64,
    pub search: [f64; 2],
    pub tolerance: f64,
    pub frames: usize,
    pub seed: u64,
    pub inits: usize,
    pub channel_grid: usize,
}

impl Default for DesignSpec {
    fn default() -> Self {
        DesignSpec {
            ebn0: None,
            target_mi: 0.9999,
            search: [0.0, 4.0],
            tolerance: 0.05,
            frames: maqd_core::design::DEFAULT_FRAMES,
            seed: 0,
            inits: maqd_core::ib::DEFAULT_INITS,
            channel_grid: maqd_core::channel::DEFAULT_GRID,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub ebn0: Vec<f64>,
    pub min_frame_errors: u64,
    pub max_frames: u64,
    /// Frames simulated between stopping checks.
    pub batch: usize,
    pub seed: u64,
    pub early_termination: bool,
    /// Transmit without noise.
    pub noiseless: bool,
    /// Frames for MI tracking.
    pub mi_frames: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            ebn0: vec![1.0, 1.5, 2.0],
            min_frame_errors: 100,
            max_frames: 1_000_000,
            batch: 256,
            seed: 1,
            early_termination: true,
            noiseless: false,
            mi_frames: 10_000,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub design: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub code: CodeSpec,
    pub decoder: DecoderSpec,
    pub design: DesignSpec,
    pub sweep: SweepSpec,
    pub output: OutputSpec,
}

/// Smallest frame-error floor accepted for reported points.
pub const MIN_FRAME_ERRORS: u64 = 50;

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BenchError::Config(m));
        self.code.rate()?;
        if self.code.z == 0 {
            return bad("z must be positive".into());
        }
        self.decoder.schedule()?;
        self.decoder.alignment()?;
        if let DecoderKind::Quantized(_) = self.decoder.kind()? {
            if !(2..=4).contains(&self.decoder.msg_width) {
                return bad(format!(
                    "msg_width {} must be 2, 3 or 4",
                    self.decoder.msg_width
                ));
            }
            maqd_core::design::validate_parameters(&parameter_header(&self.design_config(0.0)?))?;
        }
        if self.sweep.min_frame_errors < MIN_FRAME_ERRORS {
            return bad(format!(
                "min_frame_errors {} below the floor of {MIN_FRAME_ERRORS}",
                self.sweep.min_frame_errors
            ));
        }
        if self.sweep.batch == 0 || self.sweep.max_frames == 0 {
            return bad("batch and max_frames must be positive".into());
        }
        if self.sweep.ebn0.iter().any(|e| !e.is_finite()) {
            return bad("sweep Eb/N0 values must be finite".into());
        }
        let [lo, hi] = self.design.search;
        if !(lo < hi && self.design.tolerance > 0.0) {
            return bad(format!(
                "design search [{lo}, {hi}] with tolerance {} is empty",
                self.design.tolerance
            ));
        }
        if !(0.0..1.0).contains(&self.design.target_mi) {
            return bad(format!(
                "target_mi {} must lie in [0, 1)",
                self.design.target_mi
            ));
        }
        if self.design.frames == 0 || self.design.inits == 0 {
            return bad("design frames and inits must be positive".into());
        }
        Ok(())
    }

    /// Design parameters at a given design SNR.
    pub fn design_config(&self, ebn0: f64) -> Result<DesignConfig> {
        let variant = match self.decoder.kind()? {
            DecoderKind::Quantized(v) => v,
            DecoderKind::Bp => {
                return Err(BenchError::Config("the bp baseline has no design".into()))
            }
        };
        Ok(DesignConfig {
            rate: self.code.rate()?,
            schedule: self.decoder.schedule()?,
            variant,
            alignment: self.decoder.alignment()?,
            msg_width: self.decoder.msg_width,
            channel_width: self.decoder.channel_width,
            llr_width: self.decoder.llr_width,
            max_iter: self.decoder.max_iter()?,
            design_ebn0: ebn0,
            seed: self.design.seed,
            frames: self.design.frames,
            inits: self.design.inits,
            channel_grid: self.design.channel_grid,
        })
    }
}

/// Header fields that do not depend on the code.
fn parameter_header(c: &DesignConfig) -> DesignHeader {
    DesignHeader {
        code_hash: String::new(),
        z: 0,
        rate: c.rate,
        schedule: c.schedule,
        variant: c.variant,
        alignment: c.alignment,
        msg_width: c.msg_width,
        channel_width: c.channel_width,
        llr_width: c.llr_width,
        max_iter: c.max_iter,
        design_ebn0: c.design_ebn0,
        seed: c.seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_documented_defaults() {
        let c = ExperimentConfig::parse("").unwrap();
        assert_eq!(c.code.z, 32);
        assert_eq!(c.decoder.max_iter().unwrap(), 30);
        assert_eq!(c.decoder.channel_width, 5);
        assert_eq!(c.decoder.llr_width, 8);
        assert_eq!(c.design.frames, 10_000);
        assert_eq!(c.design.inits, 500);
        assert_eq!(c.design.ebn0, None);
    }

    #[test]
    fn layered_defaults_to_fifteen_iterations() {
        let c = ExperimentConfig::parse("[decoder]\nschedule = \"layered\"\n").unwrap();
        assert_eq!(c.decoder.max_iter().unwrap(), 15);
    }

    #[test]
    fn invalid_settings_are_rejected() {
        for text in [
            "[decoder]\nmsg_width = 5\n",
            "[decoder]\nmsg_width = 1\n",
            "[decoder]\nvariant = \"fancy\"\n",
            "[decoder]\nschedule = \"layered\"\nalignment = \"matrix\"\n",
            "[decoder]\nvariant = \"merged-5-2\"\n",
            "[sweep]\nmin_frame_errors = 10\n",
            "[code]\nrate = \"3/2\"\n",
            "[code]\nunknown = 1\n",
            "[design]\nsearch = [2.0, 1.0]\n",
        ] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn bp_needs_no_design_parameters() {
        let c = ExperimentConfig::parse("[decoder]\nvariant = \"bp\"\nmsg_width = 7\n").unwrap();
        assert_eq!(c.decoder.kind().unwrap(), DecoderKind::Bp);
        assert!(c.design_config(1.0).is_err());
    }
}
