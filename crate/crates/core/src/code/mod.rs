//! Quasi-cyclic LDPC codes: base graphs, lifting, encoding and syndromes.

mod base_graph;
mod encoder;
mod lifted;

pub use base_graph::{BaseGraph, LoadOptions, Rate, NO_EDGE};
pub use encoder::{Codeword, Encoder};
pub use lifted::{BaseEdge, LiftedCode};
