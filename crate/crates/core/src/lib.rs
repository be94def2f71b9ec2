//! Design and evaluation of coarsely quantized LDPC decoders.
//!
//! The crate covers the whole chain needed to build information-optimum
//! 2 to 4 bit message-passing decoders for quasi-cyclic LDPC codes:
//!
//! * [`code`]: base graphs, lifting, encoding and syndromes.
//! * [`channel`]: BPSK over AWGN, channel LLRs and the channel quantizer.
//! * [`ib`]: discrete information measures and the sequential information
//!   bottleneck optimizer with side information.
//! * [`design`]: Monte-Carlo statistics collection and per-iteration design
//!   of quantizers, reconstruction tables and merge tables.
//! * [`decoder`]: fixed-point flooding and row-layered decoders plus a
//!   floating point belief propagation baseline.

#![allow(clippy::needless_range_loop)]

pub mod channel;
pub mod code;
pub mod decoder;
pub mod design;
mod error;
pub mod fixed;
pub mod ib;
pub mod rng;

pub use error::{Error, Result};
