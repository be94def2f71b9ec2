//! Fixed-point quantized decoders and the full-precision baseline.

mod bp;
mod flooding;
mod graph;
mod layered;
mod schedule;
mod tables;

pub use bp::{boxplus, decode_bp};
pub use flooding::{check_pass, cn_phase, vn_phase, MessageStore, Scratch};
pub use graph::{min_sum, SlotGraph};
pub use layered::{layer_raw, layer_update, LayerScratch};
pub use schedule::Activation;
pub use tables::{CompiledRegion, Tables};

use crate::channel::ChannelQuantizer;
use crate::code::LiftedCode;
use crate::design::{edge_regions, DecoderDesign, Schedule};
use crate::{Error, Result};

/// Where the message quantizer sits relative to the check node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// Quantize variable-to-check messages, then min-sum on labels.
    #[default]
    BeforeCheck,
    /// Min-sum on integer LLRs, then quantize the result.
    AfterCheck,
}

#[derive(Debug, Clone, Default)]
pub struct DecodeOptions<'a> {
    /// Stop as soon as the hard decision satisfies all checks.
    pub early_termination: bool,
    pub placement: Placement,
    /// Transmitted codeword; enables per-iteration bit error counts.
    pub reference: Option<&'a [u8]>,
    /// Run fewer iterations than designed.
    pub max_iter: Option<usize>,
    /// Keep a copy of all stored messages after every iteration.
    pub record_messages: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub bits: Vec<u8>,
    /// Iterations actually run.
    pub iterations: usize,
    /// The decision satisfies every parity check.
    pub converged: bool,
    /// Bit errors over transmitted information bits after `k` iterations, `k = 0` being
    /// the channel decision; frames that stop early repeat their last value.
    pub errors: Vec<u32>,
    /// Stored messages after each iteration, if requested.
    pub messages: Vec<Vec<i8>>,
}

pub(crate) fn bit_errors(g: &SlotGraph, bits: &[u8], reference: &[u8]) -> u32 {
    bits.iter()
        .zip(reference)
        .zip(&g.scored)
        .filter(|((a, b), &t)| t && a != b)
        .count() as u32
}

/// `x_hat = 1` exactly for negative LLRs.
pub fn hard_decision(app: &[i16], bits: &mut [u8]) {
    for (b, &a) in bits.iter_mut().zip(app) {
        *b = (a < 0) as u8;
    }
}

/// Integer channel LLRs of channel labels.
pub fn channel_llrs(channel: &ChannelQuantizer, labels: &[i8]) -> Vec<i16> {
    labels.iter().map(|&t| channel.reconstruct(t)).collect()
}

/// A quantized decoder built from a design.
#[derive(Debug, Clone)]
pub struct QuantizedDecoder {
    code: LiftedCode,
    graph: SlotGraph,
    tables: Tables,
    activation: Activation,
    schedule: Schedule,
    channel: ChannelQuantizer,
    max_iter: usize,
}

impl QuantizedDecoder {
    pub fn new(code: &LiftedCode, design: &DecoderDesign) -> Result<Self> {
        let h = &design.header;
        if h.code_hash != code.base().hash() || h.z != code.z() {
            return Err(Error::Config(format!(
                "design was made for code {} with z={}, not {} with z={}",
                &h.code_hash[..12.min(h.code_hash.len())],
                h.z,
                &code.base().hash()[..12],
                code.z()
            )));
        }
        crate::design::validate_parameters(h)?;
        let regions = crate::design::region_count(code, h.alignment);
        if design.iterations.len() != h.max_iter
            || design.iterations.iter().any(|it| it.len() != regions)
        {
            return Err(Error::Validation(format!(
                "design needs {} iterations of {regions} regions",
                h.max_iter
            )));
        }
        let activation = match h.schedule {
            Schedule::Flooding => Activation::flooding(code),
            Schedule::Layered => Activation::layered(code),
        };
        Ok(QuantizedDecoder {
            code: code.clone(),
            graph: SlotGraph::new(code, edge_regions(code, h.alignment)),
            tables: Tables::from_design(h.variant, h.llr_width, &design.iterations),
            activation,
            schedule: h.schedule,
            channel: design.channel.clone(),
            max_iter: h.max_iter,
        })
    }

    pub fn code(&self) -> &LiftedCode {
        &self.code
    }

    pub fn channel(&self) -> &ChannelQuantizer {
        &self.channel
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    /// Quantizes real channel LLRs into channel labels.
    pub fn channel_labels(&self, llrs: &[f64]) -> Vec<i8> {
        self.channel.quantize_frame(&self.code, llrs)
    }

    /// Decodes one frame of channel labels.
    pub fn decode(&self, labels: &[i8], opts: &DecodeOptions) -> DecodeResult {
        assert_eq!(labels.len(), self.code.n());
        let iters = opts.max_iter.unwrap_or(self.max_iter);
        assert!(
            iters <= self.max_iter,
            "no tables beyond iteration {}",
            self.max_iter
        );
        let ch = channel_llrs(&self.channel, labels);
        match self.schedule {
            Schedule::Flooding => self.decode_flooding(&ch, iters, opts),
            Schedule::Layered => self.decode_layered(&ch, iters, opts),
        }
    }

    fn finish(
        &self,
        bits: Vec<u8>,
        used: usize,
        converged: bool,
        iters: usize,
        mut errors: Vec<u32>,
        messages: Vec<Vec<i8>>,
    ) -> DecodeResult {
        if let Some(&last) = errors.last() {
            errors.resize(iters + 1, last);
        }
        let converged = converged || self.code.is_codeword(&bits);
        DecodeResult {
            bits,
            iterations: used,
            converged,
            errors,
            messages,
        }
    }

    fn decode_flooding(&self, ch: &[i16], iters: usize, opts: &DecodeOptions) -> DecodeResult {
        let g = &self.graph;
        let mut store = MessageStore::new(g.slots());
        let mut s = Scratch::new(g);
        let mut bits = vec![0u8; g.n];
        let mut errors = Vec::new();
        let mut messages = Vec::new();
        hard_decision(ch, &mut bits);
        if let Some(r) = opts.reference {
            errors.push(bit_errors(g, &bits, r));
        }
        let mut used = 0;
        for i in 0..iters {
            if i > 0 {
                vn_phase(g, &self.tables, Some(i - 1), ch, &store, &mut s);
                hard_decision(&s.app, &mut bits);
                if let Some(r) = opts.reference {
                    errors.push(bit_errors(g, &bits, r));
                }
                if opts.early_termination && self.code.is_codeword(&bits) {
                    return self.finish(bits, used, true, iters, errors, messages);
                }
            } else {
                vn_phase(g, &self.tables, None, ch, &store, &mut s);
            }
            cn_phase(
                g,
                &self.tables,
                i,
                self.activation.mask(i),
                opts.placement,
                &s.yv,
                &mut store,
            );
            used = i + 1;
            if opts.record_messages {
                messages.push(store.msg.clone());
            }
        }
        if used > 0 {
            vn_phase(g, &self.tables, Some(used - 1), ch, &store, &mut s);
            hard_decision(&s.app, &mut bits);
            if let Some(r) = opts.reference {
                errors.push(bit_errors(g, &bits, r));
            }
        }
        self.finish(bits, used, false, iters, errors, messages)
    }

    fn decode_layered(&self, ch: &[i16], iters: usize, opts: &DecodeOptions) -> DecodeResult {
        let g = &self.graph;
        let mut store = MessageStore::new(g.slots());
        let mut app = ch.to_vec();
        let mut s = LayerScratch::default();
        let mut bits = vec![0u8; g.n];
        let mut errors = Vec::new();
        let mut messages = Vec::new();
        hard_decision(&app, &mut bits);
        if let Some(r) = opts.reference {
            errors.push(bit_errors(g, &bits, r));
        }
        let mut used = 0;
        for i in 0..iters {
            let mask = self.activation.mask(i);
            for r in 0..g.rows() {
                layer_update(
                    g,
                    &self.tables,
                    i,
                    r,
                    mask,
                    opts.placement,
                    &mut app,
                    &mut store,
                    &mut s,
                );
            }
            used = i + 1;
            if opts.record_messages {
                messages.push(store.msg.clone());
            }
            hard_decision(&app, &mut bits);
            if let Some(r) = opts.reference {
                errors.push(bit_errors(g, &bits, r));
            }
            if opts.early_termination && self.code.is_codeword(&bits) {
                return self.finish(bits, used, true, iters, errors, messages);
            }
        }
        self.finish(bits, used, false, iters, errors, messages)
    }
}
