//! Offline design of quantizers, reconstruction and merge tables.

mod format;
mod region;
mod train;
mod types;

pub use format::{read_design, write_design, FORMAT_VERSION};
pub use region::{
    design_merge_tables, design_region, symmetric_llr_order, unused_region, RegionCounts,
    RegionParams,
};
pub use train::{design_full, DesignConfig, TrainingReport, DEFAULT_FRAMES};
pub use types::{
    edge_regions, region_count, validate_parameters, Alignment, DecoderDesign, DesignHeader,
    MergeShape, MergeTables, ReconstructionTable, RegionDesign, Schedule, ThresholdQuantizer,
    Variant,
};
