//! Information bottleneck quantizer design.

mod histogram;
mod measures;
mod sequential;

pub use histogram::{JointHistogram, NORMALIZATION_TOL};
pub use measures::{
    binary_entropy, conditional_mi, joint_mi, kl_divergence, mi_from_pairs, mutual_information,
};
pub use sequential::{
    exhaustive_oracle, pair_llr, random_symmetric_clustering, sequential_ib_side, sort_by_llr,
    trace_single, Clustering, CompressionResult, IbOptions, Pull, WorkingJoint, DEFAULT_INITS,
    EXHAUSTIVE_LIMIT,
};
