//! Monte-Carlo frame and bit error simulation.

use std::time::Instant;

use maqd_core::channel::{transmit, ChannelModel};
use maqd_core::code::{Encoder, LiftedCode};
use maqd_core::decoder::{decode_bp, DecodeOptions, DecodeResult, QuantizedDecoder};
use maqd_core::design::DecoderDesign;
use maqd_core::rng::{domain, mix, substream};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::SweepSpec;
use crate::stats::{clopper_pearson, error_rate_estimate};
use crate::{BenchError, Result};

pub const CONFIDENCE: f64 = 0.95;

/// Anything that decodes channel LLRs of one frame.
#[derive(Debug, Clone)]
pub enum Decoder {
    Quantized(Box<QuantizedDecoder>),
    Bp { code: LiftedCode, max_iter: usize },
}

impl Decoder {
    /// Quantized decoder; refuses designs made for another code.
    pub fn quantized(code: &LiftedCode, design: &DecoderDesign) -> Result<Self> {
        QuantizedDecoder::new(code, design)
            .map(|d| Decoder::Quantized(Box::new(d)))
            .map_err(|e| BenchError::Mismatch(e.to_string()))
    }

    pub fn bp(code: &LiftedCode, max_iter: usize) -> Self {
        Decoder::Bp {
            code: code.clone(),
            max_iter,
        }
    }

    pub fn code(&self) -> &LiftedCode {
        match self {
            Decoder::Quantized(d) => d.code(),
            Decoder::Bp { code, .. } => code,
        }
    }

    pub fn max_iter(&self) -> usize {
        match self {
            Decoder::Quantized(d) => d.max_iter(),
            Decoder::Bp { max_iter, .. } => *max_iter,
        }
    }

    pub fn decode(&self, llrs: &[f64], early_termination: bool, reference: &[u8]) -> DecodeResult {
        match self {
            Decoder::Quantized(d) => d.decode(
                &d.channel_labels(llrs),
                &DecodeOptions {
                    early_termination,
                    reference: Some(reference),
                    ..Default::default()
                },
            ),
            Decoder::Bp { code, max_iter } => {
                decode_bp(code, llrs, *max_iter, early_termination, Some(reference))
            }
        }
    }
}

/// Random codeword and its channel LLRs for frame stream `rng`.
pub fn random_frame<R: Rng>(
    encoder: &Encoder,
    ch: &ChannelModel,
    rng: &mut R,
) -> (Vec<u8>, Vec<f64>) {
    let code = encoder.code();
    let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
    let bits = encoder
        .encode(&info)
        .expect("info length matches the code")
        .bits;
    let llrs = transmit(code, &bits, ch, rng);
    (bits, llrs)
}

/// One FER sweep point. A frame error is any wrong information bit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FerRecord {
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub fer_lo: f64,
    pub fer_hi: f64,
    /// Over transmitted information bits.
    pub ber: f64,
    pub avg_iterations: f64,
    /// The frame cap was hit before the frame-error floor.
    pub capped: bool,
    pub wall_time_s: f64,
}

/// Header of FER CSV files.
pub const FER_HEADER: &str =
    "ebn0_db,frames,frame_errors,bit_errors,fer,fer_lo,fer_hi,ber,avg_iterations,capped,wall_time_s";

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    frames: u64,
    frame_errors: u64,
    bit_errors: u64,
    iterations: u64,
}

impl Tally {
    fn add(self, o: Tally) -> Tally {
        Tally {
            frames: self.frames + o.frames,
            frame_errors: self.frame_errors + o.frame_errors,
            bit_errors: self.bit_errors + o.bit_errors,
            iterations: self.iterations + o.iterations,
        }
    }
}

fn channel(code: &LiftedCode, ebn0: f64, noiseless: bool) -> Result<ChannelModel> {
    let ch = ChannelModel::from_ebn0(ebn0, code.rate())?;
    Ok(if noiseless { ch.noiseless() } else { ch })
}

/// Simulates one point in batches until the frame-error floor or the frame
/// cap is reached. Batches are reduced with integer sums, so the result does
/// not depend on the number of worker threads.
pub fn simulate_point(dec: &Decoder, ebn0: f64, sweep: &SweepSpec) -> Result<FerRecord> {
    let start = Instant::now();
    let code = dec.code();
    let encoder = Encoder::new(code)?;
    let ch = channel(code, ebn0, sweep.noiseless)?;
    let seed = mix(&[sweep.seed, ebn0.to_bits()]);
    let scored = code.scored_len() as u64;
    let k = code.k();
    let mut total = Tally::default();
    while total.frame_errors < sweep.min_frame_errors && total.frames < sweep.max_frames {
        let count = (sweep.batch as u64).min(sweep.max_frames - total.frames);
        let first = total.frames;
        let batch = (first..first + count)
            .into_par_iter()
            .map(|f| {
                let mut rng = substream(seed, domain::EVALUATION, f);
                let (bits, llrs) = random_frame(&encoder, &ch, &mut rng);
                let out = dec.decode(&llrs, sweep.early_termination, &bits);
                Tally {
                    frames: 1,
                    frame_errors: (out.bits[..k] != bits[..k]) as u64,
                    bit_errors: *out.errors.last().unwrap() as u64,
                    iterations: out.iterations as u64,
                }
            })
            .reduce(Tally::default, Tally::add);
        total = total.add(batch);
    }
    let (fer_lo, fer_hi) = clopper_pearson(total.frame_errors, total.frames, CONFIDENCE);
    Ok(FerRecord {
        ebn0_db: ebn0,
        frames: total.frames,
        frame_errors: total.frame_errors,
        bit_errors: total.bit_errors,
        fer: total.frame_errors as f64 / total.frames as f64,
        fer_lo,
        fer_hi,
        ber: total.bit_errors as f64 / (total.frames * scored) as f64,
        avg_iterations: total.iterations as f64 / total.frames as f64,
        capped: total.frame_errors < sweep.min_frame_errors,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// FER curve over the sweep points, in the given order.
pub fn run_fer(dec: &Decoder, sweep: &SweepSpec) -> Result<Vec<FerRecord>> {
    sweep
        .ebn0
        .iter()
        .map(|&e| {
            let r = simulate_point(dec, e, sweep)?;
            log::info!(
                "Eb/N0 {:.3} dB: {} / {} frames, FER {:.3e}{}",
                r.ebn0_db,
                r.frame_errors,
                r.frames,
                r.fer,
                if r.capped { " (frame cap)" } else { "" }
            );
            Ok(r)
        })
        .collect()
}

/// `I(X; X_hat)` after one iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiRecord {
    pub iteration: usize,
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub mi: f64,
    /// Standard error of `mi` from the frame-to-frame spread.
    pub mi_sd: f64,
}

pub const MI_HEADER: &str = "iteration,bit_errors,bits,ber,mi,mi_sd";

/// Plug-in estimate `1 - H2(p)` per iteration from hard decisions over
/// transmitted information bits; iteration 0 is the channel decision.
pub fn run_mi_track(
    dec: &Decoder,
    ebn0: f64,
    frames: usize,
    seed: u64,
    noiseless: bool,
) -> Result<Vec<MiRecord>> {
    let code = dec.code();
    let encoder = Encoder::new(code)?;
    let ch = channel(code, ebn0, noiseless)?;
    let seed = mix(&[seed, ebn0.to_bits()]);
    let iters = dec.max_iter();
    let zero = || (vec![0u64; iters + 1], vec![0u128; iters + 1]);
    let (sum, sq) = (0..frames as u64)
        .into_par_iter()
        .map(|f| {
            let mut rng = substream(seed, domain::MI_TRACK, f);
            let (bits, llrs) = random_frame(&encoder, &ch, &mut rng);
            let out = dec.decode(&llrs, false, &bits);
            let e: Vec<u64> = out.errors.iter().map(|&e| e as u64).collect();
            let q = e.iter().map(|&e| (e * e) as u128).collect();
            (e, q)
        })
        .reduce(zero, |(mut a, mut b), (c, d)| {
            a.iter_mut().zip(c).for_each(|(x, y)| *x += y);
            b.iter_mut().zip(d).for_each(|(x, y)| *x += y);
            (a, b)
        });
    let per_frame = code.scored_len() as u64;
    Ok((0..=iters)
        .map(|i| {
            let e = error_rate_estimate(sum[i], sq[i], frames as u64, per_frame);
            MiRecord {
                iteration: i,
                bit_errors: sum[i],
                bits: frames as u64 * per_frame,
                ber: e.p,
                mi: e.mi,
                mi_sd: e.mi_sd,
            }
        })
        .collect())
}

/// Runs `f` on a pool of `workers` threads (all cores if `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    builder.build().expect("thread pool").install(f)
}
