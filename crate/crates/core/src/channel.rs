//! BPSK over AWGN, channel LLRs and the `w_ch`-bit channel quantizer.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::code::LiftedCode;
use crate::fixed::{llr_max, round_llr};
use crate::ib::{mi_from_pairs, sequential_ib_side, IbOptions, JointHistogram};
use crate::{Error, Result};

/// Default channel quantizer width.
pub const DEFAULT_CHANNEL_WIDTH: u32 = 5;

/// Default number of fine grid bins for channel quantizer design.
pub const DEFAULT_GRID: usize = 2000;

/// Grid half-width in units of the LLR standard deviation beyond the mean.
const GRID_SPAN_SD: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    sigma: f64,
    ebn0_db: f64,
    rate: f64,
    noiseless: bool,
}

impl ChannelModel {
    /// `sigma^2 = 1 / (2 R 10^(EbN0 / 10))`.
    pub fn from_ebn0(ebn0_db: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) || !ebn0_db.is_finite() {
            return Err(Error::Validation(format!(
                "invalid channel: Eb/N0 {ebn0_db} dB, rate {rate}"
            )));
        }
        let sigma = (1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt();
        Ok(ChannelModel {
            sigma,
            ebn0_db,
            rate,
            noiseless: false,
        })
    }

    /// Same LLR scaling, but no noise is added.
    pub fn noiseless(mut self) -> Self {
        self.noiseless = true;
        self
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn ebn0_db(&self) -> f64 {
        self.ebn0_db
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn is_noiseless(&self) -> bool {
        self.noiseless
    }

    /// Mean of `L^ch` given `b = 0`, i.e. `2 / sigma^2`.
    pub fn llr_mean(&self) -> f64 {
        2.0 / (self.sigma * self.sigma)
    }

    /// Standard deviation of `L^ch`, `2 / sigma`.
    pub fn llr_sd(&self) -> f64 {
        2.0 / self.sigma
    }

    /// `P(L^ch in [lo, hi) | b)`.
    pub fn interval_mass(&self, lo: f64, hi: f64, b: u8) -> f64 {
        let mean = if b == 0 {
            self.llr_mean()
        } else {
            -self.llr_mean()
        };
        let sd = self.llr_sd();
        let (a, c) = ((lo - mean) / sd, (hi - mean) / sd);
        // use the tail that keeps precision
        if a > 0.0 {
            normal_sf(a) - normal_sf(c)
        } else {
            normal_cdf(c) - normal_cdf(a)
        }
        .max(0.0)
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// BPSK-modulates `bits` and returns `L^ch = 2 y / sigma^2` per code bit.
/// Punctured positions get `0`.
pub fn transmit<R: Rng>(
    code: &LiftedCode,
    bits: &[u8],
    ch: &ChannelModel,
    rng: &mut R,
) -> Vec<f64> {
    let gain = ch.llr_mean();
    bits.iter()
        .enumerate()
        .map(|(i, &b)| {
            if code.is_punctured(i) {
                return 0.0;
            }
            let x = 1.0 - 2.0 * b as f64;
            let noise: f64 = if ch.noiseless {
                0.0
            } else {
                rng.sample(StandardNormal)
            };
            gain * (x + ch.sigma * noise)
        })
        .collect()
}

/// `I(B; L^ch)` for equiprobable BPSK over AWGN by numerical integration,
/// `1 - E[log2(1 + e^-L) | b = 0]`.
pub fn llr_mutual_information(ch: &ChannelModel) -> f64 {
    let mean = ch.llr_mean();
    let sd = ch.llr_sd();
    let steps = 20_000;
    let lo = mean - 12.0 * sd;
    let h = 24.0 * sd / steps as f64;
    let f = |l: f64| {
        let z = (l - mean) / sd;
        let pdf = (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
        let loss = if l > 0.0 {
            (-l).exp().ln_1p()
        } else {
            -l + l.exp().ln_1p()
        };
        pdf * loss / std::f64::consts::LN_2
    };
    // composite Simpson
    let mut acc = f(lo) + f(lo + steps as f64 * h);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    1.0 - acc * h / 3.0
}

/// `I(B; T^ch)` of a threshold quantizer from exact Gaussian interval masses.
pub fn quantizer_mutual_information(ch: &ChannelModel, thresholds: &[f64]) -> f64 {
    let pairs: Vec<[f64; 2]> = level_intervals(thresholds)
        .flat_map(|(lo, hi)| {
            [
                [
                    0.5 * ch.interval_mass(lo, hi, 0),
                    0.5 * ch.interval_mass(lo, hi, 1),
                ],
                [
                    0.5 * ch.interval_mass(-hi, -lo, 0),
                    0.5 * ch.interval_mass(-hi, -lo, 1),
                ],
            ]
        })
        .collect();
    mi_from_pairs(&pairs)
}

/// Magnitude intervals `[lo, hi)` of the positive levels `1..=half`.
fn level_intervals(thresholds: &[f64]) -> impl Iterator<Item = (f64, f64)> + '_ {
    let n = thresholds.len();
    (0..=n).map(move |j| {
        let lo = if j == 0 { 0.0 } else { thresholds[j - 1] };
        let hi = if j == n { f64::INFINITY } else { thresholds[j] };
        (lo, hi)
    })
}

/// Symmetric threshold quantizer for channel LLRs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelQuantizer {
    width: u32,
    thresholds: Vec<f64>,
    reconstruction: Vec<i16>,
    scale: f64,
}

impl ChannelQuantizer {
    /// `reconstruction[j]` is the integer LLR of level `j + 1`.
    pub fn from_parts(
        width: u32,
        thresholds: Vec<f64>,
        reconstruction: Vec<i16>,
        scale: f64,
    ) -> Result<Self> {
        if !(1..=8).contains(&width) {
            return Err(Error::Validation(format!(
                "channel width {width} out of range"
            )));
        }
        let half = 1usize << (width - 1);
        if thresholds.len() != half - 1 {
            return Err(Error::Length {
                expected: half - 1,
                got: thresholds.len(),
            });
        }
        if reconstruction.len() != half {
            return Err(Error::Length {
                expected: half,
                got: reconstruction.len(),
            });
        }
        if thresholds.iter().any(|t| !(t.is_finite() && *t > 0.0))
            || thresholds.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Validation(
                "channel thresholds must be positive and strictly increasing".into(),
            ));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Validation(format!("invalid LLR scale {scale}")));
        }
        Ok(ChannelQuantizer {
            width,
            thresholds,
            reconstruction,
            scale,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Integer LLRs of the positive levels `1..=2^(w_ch-1)`.
    pub fn reconstruction(&self) -> &[i16] {
        &self.reconstruction
    }

    /// Factor mapping real LLRs to the integer grid.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Largest label `2^(w_ch - 1)`.
    pub fn half(&self) -> i32 {
        1 << (self.width - 1)
    }

    /// Integer LLR of a label; `0` (punctured) reconstructs to `0`.
    #[inline]
    pub fn reconstruct(&self, label: i8) -> i16 {
        match label {
            0 => 0,
            l if l > 0 => self.reconstruction[l as usize - 1],
            l => -self.reconstruction[(-l) as usize - 1],
        }
    }

    /// `sign(L) * level(|L|)`; `L = 0` gives `+1`.
    #[inline]
    pub fn quantize(&self, llr: f64) -> i8 {
        let mag = llr.abs();
        let level = 1 + self.thresholds.partition_point(|&t| t <= mag) as i8;
        if llr < 0.0 {
            -level
        } else {
            level
        }
    }

    /// Quantizes a frame; punctured bits get the empty label `0`.
    pub fn quantize_frame(&self, code: &LiftedCode, llrs: &[f64]) -> Vec<i8> {
        llrs.iter()
            .enumerate()
            .map(|(i, &l)| {
                if code.is_punctured(i) {
                    0
                } else {
                    self.quantize(l)
                }
            })
            .collect()
    }
}

/// Designs the MI-maximizing `width`-bit channel quantizer on a fine grid.
///
/// Integer reconstructions use the scale that maps the largest
/// reconstruction magnitude to the `llr_width` bound.
pub fn design_channel_quantizer(
    ch: &ChannelModel,
    width: u32,
    grid: usize,
    llr_width: u32,
    opts: &IbOptions,
) -> Result<ChannelQuantizer> {
    if !(ch.sigma.is_finite() && ch.sigma > 0.0) {
        return Err(Error::Degenerate(format!(
            "noise level {} collapses the quantizer",
            ch.sigma
        )));
    }
    if width == 0 || width > 8 {
        return Err(Error::Validation(format!(
            "channel width {width} out of range"
        )));
    }
    if grid < 1000 {
        return Err(Error::Validation(format!(
            "channel grid needs at least 1000 bins, got {grid}"
        )));
    }
    let grid = grid + grid % 2;
    let span = ch.llr_mean() + GRID_SPAN_SD * ch.llr_sd();
    let edge = |j: usize| -span + 2.0 * span * j as f64 / grid as f64;
    let mut weights = Vec::with_capacity(2 * grid);
    for j in 0..grid {
        let lo = if j == 0 { f64::NEG_INFINITY } else { edge(j) };
        let hi = if j + 1 == grid {
            f64::INFINITY
        } else {
            edge(j + 1)
        };
        weights.push(0.5 * ch.interval_mass(lo, hi, 0));
        weights.push(0.5 * ch.interval_mass(lo, hi, 1));
    }
    // mirror-average so the grid histogram is exactly symmetric
    for j in 0..grid / 2 {
        let m = grid - 1 - j;
        let a = 0.5 * (weights[2 * j] + weights[2 * m + 1]);
        let b = 0.5 * (weights[2 * j + 1] + weights[2 * m]);
        weights[2 * j] = a;
        weights[2 * m + 1] = a;
        weights[2 * j + 1] = b;
        weights[2 * m] = b;
    }
    let hist = JointHistogram::from_weights(grid, 1, &weights)?;
    if hist.support_size() <= 1 {
        return Err(Error::Degenerate("channel grid carries no spread".into()));
    }
    let levels = 1usize << width;
    let result = sequential_ib_side(&hist, levels, opts)?;
    let b = result.clustering.boundaries();
    let thresholds: Vec<f64> = (levels / 2 + 1..levels).map(|k| edge(b[k])).collect();

    let llrs: Vec<f64> = level_intervals(&thresholds)
        .map(|(lo, hi)| {
            let p0 = ch.interval_mass(lo, hi, 0);
            let p1 = ch.interval_mass(lo, hi, 1);
            if p0 > 0.0 && p1 > 0.0 {
                p0.ln() - p1.ln()
            } else {
                // the LLR of an interval lies inside it
                if hi.is_finite() {
                    0.5 * (lo + hi)
                } else {
                    lo + ch.llr_sd()
                }
            }
        })
        .collect();
    let max_llr = llrs.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    if max_llr <= 0.0 {
        return Err(Error::Degenerate(
            "channel quantizer carries no information".into(),
        ));
    }
    let bound = llr_max(llr_width);
    let scale = bound as f64 / max_llr;
    let reconstruction = llrs.iter().map(|&l| round_llr(l, scale, bound)).collect();
    ChannelQuantizer::from_parts(width, thresholds, reconstruction, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::BaseGraph;
    use crate::ib::binary_entropy;
    use rand::SeedableRng;

    fn design(ebn0: f64, width: u32) -> (ChannelModel, ChannelQuantizer) {
        let ch = ChannelModel::from_ebn0(ebn0, 1.0 / 3.0).unwrap();
        let q =
            design_channel_quantizer(&ch, width, DEFAULT_GRID, 8, &IbOptions::default()).unwrap();
        (ch, q)
    }

    #[test]
    fn sigma_from_ebn0() {
        let ch = ChannelModel::from_ebn0(0.0, 0.5).unwrap();
        assert!((ch.sigma() - 1.0).abs() < 1e-15);
        let ch = ChannelModel::from_ebn0(10.0 * 2f64.log10(), 0.25).unwrap();
        assert!((ch.sigma() - 1.0).abs() < 1e-12);
        assert!(ChannelModel::from_ebn0(1.0, 0.0).is_err());
    }

    #[test]
    fn transmit_conventions() {
        let code = LiftedCode::lift(&BaseGraph::nr_bg1_set0(), 8).unwrap();
        let ch = ChannelModel::from_ebn0(1.0, code.rate()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let zeros = vec![0u8; code.n()];
        let l = transmit(&code, &zeros, &ch.noiseless(), &mut rng);
        for (i, &v) in l.iter().enumerate() {
            if code.is_punctured(i) {
                assert_eq!(v, 0.0);
            } else {
                assert!((v - ch.llr_mean()).abs() < 1e-12);
            }
        }
        let ones = vec![1u8; code.n()];
        let l = transmit(&code, &ones, &ch.noiseless(), &mut rng);
        assert!(l[code.n() - 1] < 0.0);
    }

    #[test]
    fn llr_mean_matches_gaussian_moment() {
        let code = LiftedCode::lift(&BaseGraph::nr_bg1_set0(), 32).unwrap();
        let ch = ChannelModel::from_ebn0(1.0, code.rate()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let zeros = vec![0u8; code.n()];
        let mut sum = 0.0;
        let mut count = 0usize;
        while count < 100_000 {
            for (i, v) in transmit(&code, &zeros, &ch, &mut rng)
                .into_iter()
                .enumerate()
            {
                if !code.is_punctured(i) {
                    sum += v;
                    count += 1;
                }
            }
        }
        let mean = sum / count as f64;
        let se = ch.llr_sd() / (count as f64).sqrt();
        assert!((mean - ch.llr_mean()).abs() < 3.0 * se);
    }

    #[test]
    fn one_bit_is_hard_decision_bsc() {
        let (ch, q) = design(1.0, 1);
        assert!(q.thresholds().is_empty());
        let p = normal_sf(1.0 / ch.sigma());
        let expected = 1.0 - binary_entropy(p);
        assert!((quantizer_mutual_information(&ch, q.thresholds()) - expected).abs() < 1e-12);
        assert_eq!(q.quantize(0.3), 1);
        assert_eq!(q.quantize(-0.3), -1);
    }

    #[test]
    fn five_bits_keep_almost_everything() {
        let (ch, q) = design(1.0, 5);
        assert_eq!(q.thresholds().len(), 15);
        let full = llr_mutual_information(&ch);
        let kept = quantizer_mutual_information(&ch, q.thresholds());
        assert!(kept <= full + 1e-12);
        assert!(kept >= 0.99 * full, "{kept} vs {full}");
    }

    #[test]
    fn integration_matches_monte_carlo() {
        let ch = ChannelModel::from_ebn0(0.5, 0.5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 400_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            let l = ch.llr_mean() + ch.llr_sd() * z;
            acc += (1.0 + (-l).exp()).log2();
        }
        let mc = 1.0 - acc / n as f64;
        assert!((mc - llr_mutual_information(&ch)).abs() < 3e-3);
    }

    #[test]
    fn mi_grows_with_width() {
        let ch = ChannelModel::from_ebn0(1.0, 1.0 / 3.0).unwrap();
        let mut last = 0.0;
        for w in 1..=5 {
            let q =
                design_channel_quantizer(&ch, w, DEFAULT_GRID, 8, &IbOptions::default()).unwrap();
            let mi = quantizer_mutual_information(&ch, q.thresholds());
            assert!(mi >= last - 1e-12);
            last = mi;
        }
    }

    #[test]
    fn quantize_buckets_and_symmetry() {
        let (_, q) = design(1.0, 3);
        let t = q.thresholds()[0];
        assert_eq!(q.quantize(t * 0.999), 1);
        assert_eq!(q.quantize(t), 2);
        assert_eq!(q.quantize(-1e9), -4);
        assert_eq!(q.quantize(0.0), 1);
        for l in [0.01, 0.5, 1.7, 3.3, 8.0, 40.0] {
            assert_eq!(q.quantize(-l), -q.quantize(l));
        }
        for label in -4i8..=4 {
            assert_eq!(q.reconstruct(-label), -q.reconstruct(label));
        }
        assert_eq!(q.reconstruction().last().copied(), Some(127));
    }

    #[test]
    fn quantized_histogram_matches_interval_masses() {
        let (ch, q) = design(1.0, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let n = 200_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            let t = q.quantize(ch.llr_mean() + ch.llr_sd() * z);
            counts[(t + 2 - (t > 0) as i8) as usize] += 1;
        }
        let th = q.thresholds()[0];
        let probs = [
            ch.interval_mass(f64::NEG_INFINITY, -th, 0),
            ch.interval_mass(-th, 0.0, 0),
            ch.interval_mass(0.0, th, 0),
            ch.interval_mass(th, f64::INFINITY, 0),
        ];
        for (c, p) in counts.iter().zip(probs) {
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - n as f64 * p).abs() <= 3.0 * sd + 1.0);
        }
    }

    #[test]
    fn from_parts_validation() {
        assert!(ChannelQuantizer::from_parts(2, vec![1.0], vec![10, 127], 3.0).is_ok());
        assert!(ChannelQuantizer::from_parts(2, vec![-1.0], vec![10, 127], 3.0).is_err());
        assert!(
            ChannelQuantizer::from_parts(3, vec![2.0, 1.0, 3.0], vec![1, 2, 3, 4], 3.0).is_err()
        );
        assert!(ChannelQuantizer::from_parts(2, vec![1.0, 2.0], vec![10, 127], 3.0).is_err());
    }
}
