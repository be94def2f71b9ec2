//! Designing one region from pooled training counts.

use crate::fixed::{cluster_label, llr_max, message_levels, round_llr, SignedGrid};
use crate::ib::{pair_llr, sequential_ib_side, Clustering, IbOptions, JointHistogram};
use crate::{Error, Result};

use super::types::{
    MergeShape, MergeTables, ReconstructionTable, RegionDesign, ThresholdQuantizer,
};

/// Integer counts of `(x, y, s)` for one region.
///
/// `y` indexes a [`SignedGrid`] of unquantized check outputs and `s`
/// the side labels `-s_half..=s_half` at index `s + s_half`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionCounts {
    pub ny: usize,
    pub s_half: i32,
    pub counts: Vec<u64>,
}

impl RegionCounts {
    pub fn new(ny: usize, s_half: i32) -> Self {
        RegionCounts {
            ny,
            s_half,
            counts: vec![0; 2 * ny * (2 * s_half as usize + 1)],
        }
    }

    pub fn ns(&self) -> usize {
        2 * self.s_half as usize + 1
    }

    #[inline]
    pub fn index(&self, x: u8, y: usize, s: i8) -> usize {
        (y * self.ns() + (s as i32 + self.s_half) as usize) * 2 + x as usize
    }

    #[inline]
    pub fn add(&mut self, x: u8, y: usize, s: i8) {
        let i = self.index(x, y, s);
        self.counts[i] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge_from(&mut self, other: &RegionCounts) {
        assert_eq!(self.counts.len(), other.counts.len());
        self.counts
            .iter_mut()
            .zip(&other.counts)
            .for_each(|(a, b)| *a += b);
    }

    /// `c(x, y, s) + c(1 - x, -y, -s)`; exact, so mirrored cells are equal.
    pub fn symmetrized(&self) -> RegionCounts {
        let ns = self.ns();
        let mut out = self.clone();
        for y in 0..self.ny {
            for s in 0..ns {
                for x in 0..2 {
                    let i = (y * ns + s) * 2 + x;
                    let j = ((self.ny - 1 - y) * ns + (ns - 1 - s)) * 2 + (1 - x);
                    out.counts[i] = self.counts[i] + self.counts[j];
                }
            }
        }
        out
    }
}

/// Parameters shared by all regions of a design.
#[derive(Debug, Clone, Copy)]
pub struct RegionParams {
    pub msg_width: u32,
    pub llr_width: u32,
    /// Real-to-integer LLR scale.
    pub scale: f64,
    /// `(upsilon_width, psi_width)` when merge tables are designed.
    pub merge: Option<(u32, u32)>,
}

/// LLR of integer counts; `None` without mass.
fn count_llr(c0: u64, c1: u64) -> Option<f64> {
    if c0 == 0 && c1 == 0 {
        None
    } else {
        Some(pair_llr([c0 as f64, c1 as f64]))
    }
}

fn to_int(llr: Option<f64>, fallback: Option<f64>, sign: i32, scale: f64, max: i32) -> i16 {
    match llr.or(fallback) {
        Some(l) => round_llr(l, scale, max),
        None => (sign * max) as i16,
    }
}

/// Placeholder for a region whose locations never carried a message.
pub fn unused_region(params: &RegionParams, s_half: i32) -> RegionDesign {
    let h = message_levels(params.msg_width);
    RegionDesign {
        used: false,
        quantizer: ThresholdQuantizer::placeholder(params.msg_width),
        reconstruction: ReconstructionTable::zeros(h, s_half),
        merge: params.merge.map(|(wu, wp)| {
            let hu = message_levels(wu);
            let hp = message_levels(wp);
            let shape = MergeShape {
                msg_half: h,
                side_half: s_half.min(hp),
                upsilon_half: hu,
                psi_half: hp,
            };
            let upsilon = (-shape.side_half..=shape.side_half)
                .flat_map(|_| (-h..=h).map(|t| t.signum() as i8))
                .collect();
            let psi = (-hu..=hu).map(|u| u.signum() as i8).collect();
            MergeTables::new(
                shape,
                upsilon,
                psi,
                vec![0; (2 * hu + 1) as usize],
                params.llr_width,
            )
            .expect("placeholder merge tables are valid")
        }),
        preserved: 0.0,
    }
}

/// Designs quantizer, reconstruction table and optional merge tables.
///
/// Returns `Ok(None)` when the region saw no samples at all.
pub fn design_region(
    counts: &RegionCounts,
    params: &RegionParams,
    opts: &IbOptions,
) -> Result<Option<RegionDesign>> {
    let c = counts.symmetrized();
    if c.total() == 0 {
        return Ok(None);
    }
    let ns = c.ns();
    let grid = SignedGrid::new((c.ny / 2 - 1) as i32);
    let n = 1usize << params.msg_width;
    let h = message_levels(params.msg_width);
    let max = llr_max(params.llr_width);

    // observation alphabet: support of the grid, padded with the smallest
    // unused magnitudes so that it holds at least n symbols
    let mass = |y: usize| (0..ns * 2).map(|k| c.counts[y * ns * 2 + k]).sum::<u64>();
    let mut keep: Vec<bool> = (0..c.ny).map(|y| mass(y) > 0).collect();
    let mut size = keep.iter().filter(|&&k| k).count();
    let mut m = 0;
    while size < n && m <= grid.max() {
        for idx in [grid.index(true, m), grid.index(false, m)] {
            if !keep[idx] {
                keep[idx] = true;
                size += 1;
            }
        }
        m += 1;
    }
    let ys: Vec<usize> = (0..c.ny).filter(|&y| keep[y]).collect();
    let weights: Vec<f64> = ys
        .iter()
        .flat_map(|&y| (0..ns * 2).map(move |k| (y, k)))
        .map(|(y, k)| c.counts[y * ns * 2 + k] as f64)
        .collect();
    let hist = JointHistogram::from_weights(ys.len(), ns, &weights)?;
    let result = sequential_ib_side(&hist, n, opts)?;
    let b = result.clustering.boundaries();
    let thresholds: Vec<i32> = (1..h as usize)
        .map(|j| {
            let (neg, mag) = grid.value(ys[b[h as usize + j]]);
            debug_assert!(!neg);
            mag
        })
        .collect();
    let quantizer = ThresholdQuantizer::new(params.msg_width, thresholds)?;

    // compressed counts over (t, s), t = -h..=h at t + h
    let nt = (2 * h + 1) as usize;
    let mut tc = vec![[0u64; 2]; nt * ns];
    for y in 0..c.ny {
        let (neg, mag) = grid.value(y);
        let t = quantizer.quantize_signed(neg, mag);
        for s in 0..ns {
            let cell = &mut tc[(t + h) as usize * ns + s];
            cell[0] += c.counts[(y * ns + s) * 2];
            cell[1] += c.counts[(y * ns + s) * 2 + 1];
        }
    }
    let mut entries = vec![0i16; nt * ns];
    for t in (-h..=h).filter(|&t| t != 0) {
        let row = (t + h) as usize * ns;
        let marginal = (0..ns).fold([0u64; 2], |a, s| {
            [a[0] + tc[row + s][0], a[1] + tc[row + s][1]]
        });
        let fallback = count_llr(marginal[0], marginal[1]);
        for s in 0..ns {
            let cell = tc[row + s];
            entries[row + s] = to_int(
                count_llr(cell[0], cell[1]),
                fallback,
                t.signum(),
                params.scale,
                max,
            );
        }
    }
    let reconstruction = ReconstructionTable::new(h, c.s_half, entries, params.llr_width)?;

    let merge = match params.merge {
        Some((wu, wp)) => Some(design_merge_tables(&tc, h, c.s_half, wu, wp, params, opts)?),
        None => None,
    };
    Ok(Some(RegionDesign {
        used: true,
        quantizer,
        reconstruction,
        merge,
        preserved: result.preserved,
    }))
}

/// Order of a mirror-symmetric alphabet by LLR such that position `k` and
/// `len - 1 - k` hold mirror images. `positive` decides the side of
/// elements without evidence either way.
pub fn symmetric_llr_order(
    cells: &[[u64; 2]],
    mirror: impl Fn(usize) -> usize,
    positive: impl Fn(usize) -> bool,
) -> Vec<usize> {
    let key = |a: usize| count_llr(cells[a][0], cells[a][1]).unwrap_or(0.0);
    let mut upper: Vec<usize> = (0..cells.len())
        .filter(|&a| {
            let k = key(a);
            k > 0.0 || (k == 0.0 && positive(a))
        })
        .collect();
    upper.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap().then(a.cmp(&b)));
    let mut order: Vec<usize> = upper.iter().rev().map(|&a| mirror(a)).collect();
    order.extend(upper);
    order
}

/// Threshold clustering of an already ordered symmetric alphabet into at
/// most `n` clusters; returns the label of every position.
fn cluster_ordered(
    cells: &[[u64; 2]],
    order: &[usize],
    n: usize,
    opts: &IbOptions,
) -> Result<Vec<i32>> {
    let len = order.len();
    let clustering = if len <= n {
        Clustering::identity(len)
    } else {
        let weights: Vec<f64> = order
            .iter()
            .flat_map(|&a| [cells[a][0] as f64, cells[a][1] as f64])
            .collect();
        let hist = JointHistogram::from_weights(len, 1, &weights)?;
        sequential_ib_side(&hist, n, opts)?.clustering
    };
    let k = clustering.clusters();
    Ok((0..len)
        .map(|pos| cluster_label(clustering.cluster_of(pos), k))
        .collect())
}

/// Designs `Y`, `P` and `phi` from compressed counts `tc[(t + h) * ns + s]`.
pub fn design_merge_tables(
    tc: &[[u64; 2]],
    h: i32,
    side_half: i32,
    upsilon_width: u32,
    psi_width: u32,
    params: &RegionParams,
    opts: &IbOptions,
) -> Result<MergeTables> {
    let ns = (2 * side_half + 1) as usize;
    let hu = message_levels(upsilon_width);
    let hp = message_levels(psi_width);
    if side_half > hp {
        return Err(Error::Validation(format!(
            "side labels up to {side_half} exceed psi range {hp}"
        )));
    }
    let max = llr_max(params.llr_width);
    // flattened (s, t) alphabet without the empty message t = 0
    let ts: Vec<i32> = (-h..=h).filter(|&t| t != 0).collect();
    let pairs: Vec<(i32, i32)> = (-side_half..=side_half)
        .flat_map(|s| ts.iter().map(move |&t| (s, t)))
        .collect();
    let pos = |s: i32, t: i32| {
        ((s + side_half) as usize) * ts.len()
            + if t < 0 {
                (t + h) as usize
            } else {
                (t + h - 1) as usize
            }
    };
    let cells: Vec<[u64; 2]> = pairs
        .iter()
        .map(|&(s, t)| tc[(t + h) as usize * ns + (s + side_half) as usize])
        .collect();
    let order = symmetric_llr_order(
        &cells,
        |a| pos(-pairs[a].0, -pairs[a].1),
        |a| pairs[a].1 > 0,
    );
    let labels = cluster_ordered(&cells, &order, 1 << upsilon_width, opts)?;
    let mut upsilon = vec![0i8; ns * (2 * h + 1) as usize];
    let mut uc = vec![[0u64; 2]; (2 * hu + 1) as usize];
    for (k, &a) in order.iter().enumerate() {
        let (s, t) = pairs[a];
        let u = labels[k];
        upsilon[(s + side_half) as usize * (2 * h + 1) as usize + (t + h) as usize] = u as i8;
        uc[(u + hu) as usize][0] += cells[a][0];
        uc[(u + hu) as usize][1] += cells[a][1];
    }

    // P over the merged labels, ordered by their own LLRs
    let us: Vec<i32> = (-hu..=hu).filter(|&u| u != 0).collect();
    let ucells: Vec<[u64; 2]> = us.iter().map(|&u| uc[(u + hu) as usize]).collect();
    let upos = |u: i32| {
        if u < 0 {
            (u + hu) as usize
        } else {
            (u + hu - 1) as usize
        }
    };
    let uorder = symmetric_llr_order(&ucells, |a| upos(-us[a]), |a| us[a] > 0);
    let ulabels = cluster_ordered(&ucells, &uorder, 1 << psi_width, opts)?;
    let mut psi = vec![0i8; (2 * hu + 1) as usize];
    for (k, &a) in uorder.iter().enumerate() {
        psi[(us[a] + hu) as usize] = ulabels[k] as i8;
    }
    let phi: Vec<i16> = (-hu..=hu)
        .map(|u| {
            let cell = uc[(u + hu) as usize];
            if u == 0 {
                0
            } else {
                count_llr(cell[0], cell[1]).map_or(0, |l| round_llr(l, params.scale, max))
            }
        })
        .collect();
    let shape = MergeShape {
        msg_half: h,
        side_half,
        upsilon_half: hu,
        psi_half: hp,
    };
    MergeTables::new(shape, upsilon, psi, phi, params.llr_width)
}
