//! Iteration-by-iteration design from simulated training frames.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{
    design_channel_quantizer, transmit, ChannelModel, ChannelQuantizer, DEFAULT_CHANNEL_WIDTH,
    DEFAULT_GRID,
};
use crate::code::{Encoder, LiftedCode, Rate};
use crate::decoder::{
    channel_llrs, check_pass, hard_decision, layer_raw, layer_update, vn_phase, Activation,
    LayerScratch, MessageStore, Placement, Scratch, SlotGraph, Tables,
};
use crate::fixed::message_levels;
use crate::ib::{IbOptions, DEFAULT_INITS};
use crate::rng::{domain, mix, substream};
use crate::Result;

use super::region::{design_region, unused_region, RegionCounts, RegionParams};
use super::types::{
    edge_regions, region_count, validate_parameters, Alignment, DecoderDesign, DesignHeader,
    RegionDesign, Schedule, Variant,
};

/// Purpose tags for optimizer seeds.
const PURPOSE_CHANNEL: u64 = 1;
const PURPOSE_REGION: u64 = 2;

/// Default training frames per design.
pub const DEFAULT_FRAMES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    pub rate: Rate,
    pub schedule: Schedule,
    pub variant: Variant,
    pub alignment: Alignment,
    pub msg_width: u32,
    pub channel_width: u32,
    pub llr_width: u32,
    pub max_iter: usize,
    pub design_ebn0: f64,
    pub seed: u64,
    pub frames: usize,
    pub inits: usize,
    pub channel_grid: usize,
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            rate: Rate::new(1, 3),
            schedule: Schedule::Flooding,
            variant: Variant::Conventional,
            alignment: Alignment::Row,
            msg_width: 2,
            channel_width: DEFAULT_CHANNEL_WIDTH,
            llr_width: 8,
            max_iter: 30,
            design_ebn0: 1.0,
            seed: 0,
            frames: DEFAULT_FRAMES,
            inits: DEFAULT_INITS,
            channel_grid: DEFAULT_GRID,
        }
    }
}

impl DesignConfig {
    pub fn header(&self, code: &LiftedCode) -> DesignHeader {
        DesignHeader {
            code_hash: code.base().hash(),
            z: code.z(),
            rate: self.rate,
            schedule: self.schedule,
            variant: self.variant,
            alignment: self.alignment,
            msg_width: self.msg_width,
            channel_width: self.channel_width,
            llr_width: self.llr_width,
            max_iter: self.max_iter,
            design_ebn0: self.design_ebn0,
            seed: self.seed,
        }
    }
}

/// What the training frames did while the design was built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingReport {
    /// Bit error rate over transmitted information bits of the training frames after each iteration.
    pub bit_error_rate: Vec<f64>,
    /// `I(X; T | S)` preserved per iteration, averaged over used regions.
    pub preserved: Vec<f64>,
}

impl TrainingReport {
    /// `1 - H2(p)` of the final bit error rate.
    pub fn final_mutual_information(&self) -> f64 {
        self.bit_error_rate
            .last()
            .map_or(0.0, |&p| 1.0 - crate::ib::binary_entropy(p))
    }
}

/// One training frame.
struct Frame {
    bits: Vec<u8>,
    ch: Vec<i16>,
    store: MessageStore,
    app: Vec<i16>,
    /// Grid index of the raw check output per slot (flooding only).
    yc: Vec<u8>,
}

/// Side label range of iteration `i`.
fn side_half(variant: Variant, msg_width: u32, i: usize) -> i32 {
    if i == 0 {
        return 0;
    }
    match variant {
        Variant::Conventional => 0,
        Variant::MemoryAssisted => message_levels(msg_width),
        Variant::Merged { psi_width, .. } => message_levels(psi_width),
    }
}

fn region_options(config: &DesignConfig, i: usize, region: usize) -> IbOptions {
    IbOptions {
        inits: config.inits,
        seed: mix(&[config.seed, i as u64, region as u64, PURPOSE_REGION]),
        debug_check: false,
    }
}

/// Designs a complete decoder. `checkpoint` sees the partial design after
/// every iteration.
pub fn design_full<F>(
    code: &LiftedCode,
    config: &DesignConfig,
    mut checkpoint: F,
) -> Result<(DecoderDesign, TrainingReport)>
where
    F: FnMut(&DecoderDesign) -> Result<()>,
{
    let header = config.header(code);
    validate_parameters(&header)?;
    let ch = ChannelModel::from_ebn0(config.design_ebn0, code.rate())?;
    let channel = design_channel_quantizer(
        &ch,
        config.channel_width,
        config.channel_grid,
        config.llr_width,
        &IbOptions {
            inits: config.inits,
            seed: mix(&[config.seed, PURPOSE_CHANNEL]),
            debug_check: false,
        },
    )?;
    let params = RegionParams {
        msg_width: config.msg_width,
        llr_width: config.llr_width,
        scale: channel.scale(),
        merge: match config.variant {
            Variant::Merged {
                upsilon_width,
                psi_width,
            } => Some((upsilon_width, psi_width)),
            _ => None,
        },
    };
    let graph = SlotGraph::new(code, edge_regions(code, config.alignment));
    let regions = region_count(code, config.alignment);
    let mut frames = training_frames(code, config, &ch, &channel, &graph)?;
    let mut design = DecoderDesign {
        header,
        channel,
        iterations: Vec::new(),
    };
    let mut tables = Tables::new(config.variant, config.llr_width);
    let mut report = TrainingReport::default();
    let ctx = Context {
        config,
        graph: &graph,
        params: &params,
        regions,
    };
    match config.schedule {
        Schedule::Flooding => {
            let activation = Activation::flooding(code);
            for i in 0..config.max_iter {
                let (counts, errors) =
                    ctx.flooding_raw(&tables, i, activation.mask(i), &mut frames);
                if i > 0 {
                    report
                        .bit_error_rate
                        .push(ctx.error_rate(errors, frames.len()));
                }
                let designed = ctx.design_iteration(i, &counts)?;
                report.preserved.push(mean_preserved(&designed));
                for d in &designed {
                    tables.push_region(i, d.clone());
                }
                ctx.flooding_apply(&tables, i, activation.mask(i), &mut frames);
                design.iterations.push(designed);
                checkpoint(&design)?;
            }
            if config.max_iter > 0 {
                let errors = ctx.flooding_final(&tables, config.max_iter - 1, &mut frames);
                report
                    .bit_error_rate
                    .push(ctx.error_rate(errors, frames.len()));
            }
        }
        Schedule::Layered => {
            let activation = Activation::layered(code);
            for i in 0..config.max_iter {
                let mask = activation.mask(i);
                let mut designed = Vec::with_capacity(regions);
                for r in 0..graph.rows() {
                    let counts = ctx.layer_counts(&tables, i, r, mask, &frames);
                    let d = ctx.design_one(i, r, &counts)?;
                    tables.push_region(i, d.clone());
                    designed.push(d);
                    frames
                        .par_iter_mut()
                        .for_each_init(LayerScratch::default, |s, f| {
                            layer_update(
                                &graph,
                                &tables,
                                i,
                                r,
                                mask,
                                Placement::AfterCheck,
                                &mut f.app,
                                &mut f.store,
                                s,
                            );
                        });
                }
                let errors: u64 = frames
                    .par_iter()
                    .map(|f| {
                        let mut bits = vec![0u8; graph.n];
                        hard_decision(&f.app, &mut bits);
                        crate::decoder::bit_errors(&graph, &bits, &f.bits) as u64
                    })
                    .sum();
                report
                    .bit_error_rate
                    .push(ctx.error_rate(errors, frames.len()));
                report.preserved.push(mean_preserved(&designed));
                design.iterations.push(designed);
                checkpoint(&design)?;
            }
        }
    }
    for (i, (p, ber)) in report
        .preserved
        .iter()
        .zip(&report.bit_error_rate)
        .enumerate()
    {
        log::debug!("iteration {i}: preserved {p:.6}, training BER {ber:.3e}");
    }
    Ok((design, report))
}

fn mean_preserved(designed: &[RegionDesign]) -> f64 {
    let used: Vec<f64> = designed
        .iter()
        .filter(|d| d.used)
        .map(|d| d.preserved)
        .collect();
    if used.is_empty() {
        0.0
    } else {
        used.iter().sum::<f64>() / used.len() as f64
    }
}

fn training_frames(
    code: &LiftedCode,
    config: &DesignConfig,
    ch: &ChannelModel,
    channel: &ChannelQuantizer,
    graph: &SlotGraph,
) -> Result<Vec<Frame>> {
    let encoder = Encoder::new(code)?;
    let flooding = config.schedule == Schedule::Flooding;
    (0..config.frames)
        .into_par_iter()
        .map(|f| {
            let mut rng = substream(config.seed, domain::TRAINING, f as u64);
            let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
            let bits = encoder.encode(&info)?.bits;
            let llrs = transmit(code, &bits, ch, &mut rng);
            let ch = channel_llrs(channel, &channel.quantize_frame(code, &llrs));
            Ok(Frame {
                app: if flooding { Vec::new() } else { ch.clone() },
                yc: if flooding {
                    vec![0; graph.slots()]
                } else {
                    Vec::new()
                },
                store: MessageStore::new(graph.slots()),
                bits,
                ch,
            })
        })
        .collect()
}

struct Context<'a> {
    config: &'a DesignConfig,
    graph: &'a SlotGraph,
    params: &'a RegionParams,
    regions: usize,
}

impl Context<'_> {
    fn empty_counts(&self, i: usize) -> Vec<RegionCounts> {
        let ny = 2 * (crate::fixed::llr_max(self.config.llr_width) as usize + 1);
        let s_half = side_half(self.config.variant, self.config.msg_width, i);
        vec![RegionCounts::new(ny, s_half); self.regions]
    }

    fn error_rate(&self, errors: u64, frames: usize) -> f64 {
        let bits = self.graph.scored.iter().filter(|&&t| t).count() * frames;
        errors as f64 / bits as f64
    }

    fn design_one(&self, i: usize, region: usize, counts: &RegionCounts) -> Result<RegionDesign> {
        Ok(
            design_region(counts, self.params, &region_options(self.config, i, region))?
                .unwrap_or_else(|| unused_region(self.params, counts.s_half)),
        )
    }

    fn design_iteration(&self, i: usize, counts: &[RegionCounts]) -> Result<Vec<RegionDesign>> {
        counts
            .par_iter()
            .enumerate()
            .map(|(r, c)| self.design_one(i, r, c))
            .collect()
    }

    /// Raw check outputs of iteration `i`; also counts hard-decision errors
    /// after iteration `i - 1`.
    fn flooding_raw(
        &self,
        tables: &Tables,
        i: usize,
        mask: Option<&[bool]>,
        frames: &mut [Frame],
    ) -> (Vec<RegionCounts>, u64) {
        let g = self.graph;
        let grid = tables.grid();
        frames
            .par_iter_mut()
            .fold(
                || (self.empty_counts(i), 0u64, Scratch::new(g), vec![0u8; g.n]),
                |(mut counts, mut errors, mut s, mut bits), f| {
                    vn_phase(g, tables, i.checked_sub(1), &f.ch, &f.store, &mut s);
                    if i > 0 {
                        hard_decision(&s.app, &mut bits);
                        errors += crate::decoder::bit_errors(g, &bits, &f.bits) as u64;
                    }
                    let Frame {
                        bits: x, store, yc, ..
                    } = f;
                    let z = g.z;
                    check_pass(
                        g,
                        0..g.rows(),
                        mask,
                        |e, ins| ins.copy_from_slice(&s.yv[e * z..(e + 1) * z]),
                        |e, neg, mag| {
                            let region = g.edge_region[e];
                            let c = &mut counts[region];
                            let prev = i.checked_sub(1).map(|j| tables.region(j, region));
                            let x: &[u8] = x;
                            let range = e * z..(e + 1) * z;
                            // repeated cells are common; batch them
                            let (mut last, mut run) = (usize::MAX, 0u64);
                            for ((((&n, &m), yc), &old), &vn) in neg
                                .iter()
                                .zip(mag)
                                .zip(&mut yc[range.clone()])
                                .zip(&store.msg[range.clone()])
                                .zip(&g.slot_vn[range])
                            {
                                let y = grid.index(n, m as i32);
                                *yc = y as u8;
                                let cell = c.index(
                                    x[vn as usize],
                                    y,
                                    prev.map_or(0, |p| p.next_side(old)),
                                );
                                if cell == last {
                                    run += 1;
                                } else {
                                    if run > 0 {
                                        c.counts[last] += run;
                                    }
                                    last = cell;
                                    run = 1;
                                }
                            }
                            if run > 0 {
                                c.counts[last] += run;
                            }
                        },
                    );
                    (counts, errors, s, bits)
                },
            )
            .map(|(c, e, _, _)| (c, e))
            .reduce(
                || (self.empty_counts(i), 0),
                |(mut a, ea), (b, eb)| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| x.merge_from(y));
                    (a, ea + eb)
                },
            )
    }

    /// Quantizes and stores the raw outputs kept by [`Self::flooding_raw`].
    fn flooding_apply(
        &self,
        tables: &Tables,
        i: usize,
        mask: Option<&[bool]>,
        frames: &mut [Frame],
    ) {
        let g = self.graph;
        let grid = tables.grid();
        // label of every grid index, per region
        let labels: Vec<Vec<i8>> = (0..self.regions)
            .map(|r| {
                (0..grid.len())
                    .map(|y| {
                        let (neg, mag) = grid.value(y);
                        tables.quantize_signed(i, r, neg, mag as i16)
                    })
                    .collect()
            })
            .collect();
        frames.par_iter_mut().for_each(|f| {
            for (e, &region) in g.edge_region.iter().enumerate() {
                if !mask.is_none_or(|m| m[e]) {
                    continue;
                }
                let table = tables.region(i, region);
                let labels = &labels[region];
                for slot in e * g.z..(e + 1) * g.z {
                    table.store(
                        &mut f.store.msg[slot],
                        &mut f.store.side[slot],
                        labels[f.yc[slot] as usize],
                    );
                }
            }
        });
    }

    fn flooding_final(&self, tables: &Tables, last: usize, frames: &mut [Frame]) -> u64 {
        let g = self.graph;
        frames
            .par_iter_mut()
            .map_init(
                || (Scratch::new(g), vec![0u8; g.n]),
                |(s, bits), f| {
                    vn_phase(g, tables, Some(last), &f.ch, &f.store, s);
                    hard_decision(&s.app, bits);
                    crate::decoder::bit_errors(g, bits, &f.bits) as u64
                },
            )
            .sum()
    }

    fn layer_counts(
        &self,
        tables: &Tables,
        i: usize,
        r: usize,
        mask: Option<&[bool]>,
        frames: &[Frame],
    ) -> RegionCounts {
        let g = self.graph;
        let grid = tables.grid();
        let fresh = || self.empty_counts(i).swap_remove(r);
        frames
            .par_iter()
            .fold(
                || (fresh(), LayerScratch::default()),
                |(mut c, mut s), f| {
                    layer_raw(
                        g,
                        tables,
                        i,
                        r,
                        mask,
                        &f.app,
                        &f.store,
                        &mut s,
                        |slot, _, neg, mag| {
                            let y = grid.index(neg, mag as i32);
                            let side = tables.side_symbol(i, r, f.store.msg[slot]);
                            c.add(f.bits[g.slot_vn[slot] as usize], y, side);
                        },
                    );
                    (c, s)
                },
            )
            .map(|(c, _)| c)
            .reduce(fresh, |mut a, b| {
                a.merge_from(&b);
                a
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::BaseGraph;

    fn small() -> LiftedCode {
        let bg = BaseGraph::nr_bg1_set0()
            .rate_adapt(Rate::new(2, 3))
            .unwrap();
        LiftedCode::lift(&bg, 4).unwrap()
    }

    fn config(schedule: Schedule, variant: Variant) -> DesignConfig {
        DesignConfig {
            schedule,
            variant,
            max_iter: 4,
            design_ebn0: 3.0,
            frames: 200,
            inits: 20,
            ..DesignConfig::default()
        }
    }

    #[test]
    fn designs_have_expected_shape() {
        let code = small();
        for (schedule, variant) in [
            (Schedule::Flooding, Variant::Conventional),
            (Schedule::Flooding, Variant::MemoryAssisted),
            (Schedule::Layered, Variant::MemoryAssisted),
            (
                Schedule::Flooding,
                Variant::Merged {
                    upsilon_width: 3,
                    psi_width: 2,
                },
            ),
        ] {
            let mut seen = 0;
            let (d, report) = design_full(&code, &config(schedule, variant), |_| {
                seen += 1;
                Ok(())
            })
            .unwrap();
            assert_eq!(seen, 4);
            assert_eq!(d.iterations.len(), 4);
            assert!(d.iterations.iter().all(|it| it.len() == code.base().rows()));
            assert_eq!(report.bit_error_rate.len(), 4);
            let first = d.iterations[0][0].reconstruction.s_half();
            assert_eq!(first, 0);
            let later = d.iterations[1][0].reconstruction.s_half();
            assert_eq!(later == 0, variant == Variant::Conventional);
            crate::decoder::QuantizedDecoder::new(&code, &d).unwrap();
        }
    }

    #[test]
    fn equal_seeds_give_equal_designs() {
        let code = small();
        let c = config(Schedule::Flooding, Variant::MemoryAssisted);
        let a = design_full(&code, &c, |_| Ok(())).unwrap();
        let b = design_full(&code, &c, |_| Ok(())).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn training_error_rate_drops() {
        let code = small();
        let c = DesignConfig {
            design_ebn0: 5.0,
            max_iter: 8,
            ..config(Schedule::Flooding, Variant::MemoryAssisted)
        };
        let (_, report) = design_full(&code, &c, |_| Ok(())).unwrap();
        let ber = &report.bit_error_rate;
        assert!(ber[7] < 0.5 * ber[0], "{ber:?}");
    }

    #[test]
    fn matrix_counts_are_the_sum_of_row_counts() {
        let code = small();
        let mut counts = Vec::new();
        for alignment in [Alignment::Row, Alignment::Matrix] {
            let c = DesignConfig {
                alignment,
                ..config(Schedule::Flooding, Variant::MemoryAssisted)
            };
            let ch = ChannelModel::from_ebn0(c.design_ebn0, code.rate()).unwrap();
            let channel = design_channel_quantizer(
                &ch,
                c.channel_width,
                c.channel_grid,
                c.llr_width,
                &IbOptions::default(),
            )
            .unwrap();
            let graph = SlotGraph::new(&code, edge_regions(&code, alignment));
            let mut frames = training_frames(&code, &c, &ch, &channel, &graph).unwrap();
            let params = RegionParams {
                msg_width: c.msg_width,
                llr_width: c.llr_width,
                scale: channel.scale(),
                merge: None,
            };
            let ctx = Context {
                config: &c,
                graph: &graph,
                params: &params,
                regions: region_count(&code, alignment),
            };
            let tables = Tables::new(c.variant, c.llr_width);
            let activation = Activation::flooding(&code);
            counts.push(
                ctx.flooding_raw(&tables, 0, activation.mask(0), &mut frames)
                    .0,
            );
        }
        let (rows, matrix) = (&counts[0], &counts[1]);
        assert_eq!(rows.len(), code.base().rows());
        assert_eq!(matrix.len(), 1);
        let mut sum = RegionCounts::new(matrix[0].ny, matrix[0].s_half);
        rows.iter().for_each(|r| sum.merge_from(r));
        assert_eq!(sum, matrix[0]);
        assert!(sum.total() > 0);
    }
}
