//! Row-layered schedule: one layer per base row, rows in ascending order.

use super::flooding::MessageStore;
use super::graph::{min_sum, SlotGraph};
use super::tables::Tables;
use super::Placement;
use crate::fixed::saturate;

/// Bound of the layered APP register. `L_hat` is updated in place, so a
/// `w'`-bit register would lose the part of a strong channel LLR that an
/// old message is later subtracted from; the check node still sees `L^v`
/// saturated to `w'` bits.
#[inline]
pub fn app_max(llr_max: i32) -> i32 {
    8 * (llr_max + 1) - 1
}

/// Per-layer buffers.
#[derive(Debug, Clone, Default)]
pub struct LayerScratch {
    lv: Vec<i16>,
    ins: Vec<i16>,
    outs: Vec<(bool, i16)>,
}

/// `L^v = L_hat - rec(old message)` for the slots of row `r`, check `p`,
/// kept at APP width.
#[inline]
#[allow(clippy::too_many_arguments)]
fn partial_vn(
    g: &SlotGraph,
    t: &Tables,
    i: usize,
    r: usize,
    p: usize,
    app: &[i16],
    store: &MessageStore,
    lv: &mut Vec<i16>,
) {
    let max = app_max(t.llr_max());
    lv.clear();
    for e in g.row_edges[r].clone() {
        let slot = e * g.z + p;
        let v = g.slot_vn[slot] as usize;
        let old = if i == 0 {
            0
        } else {
            t.reconstruct(i - 1, g.edge_region[e], store.msg[slot], store.side[slot])
        };
        lv.push(saturate(app[v] as i32 - old as i32, max));
    }
}

/// Updates layer `r` in iteration `i`.
#[allow(clippy::too_many_arguments)]
pub fn layer_update(
    g: &SlotGraph,
    t: &Tables,
    i: usize,
    r: usize,
    mask: Option<&[bool]>,
    placement: Placement,
    app: &mut [i16],
    store: &mut MessageStore,
    s: &mut LayerScratch,
) {
    let max = t.llr_max();
    let wide = app_max(max);
    let edges = g.row_edges[r].clone();
    for p in 0..g.z {
        partial_vn(g, t, i, r, p, app, store, &mut s.lv);
        s.ins.clear();
        for (k, e) in edges.clone().enumerate() {
            let v = saturate(s.lv[k] as i32, max);
            s.ins.push(match placement {
                Placement::BeforeCheck => t.quantize(i, g.edge_region[e], v) as i16,
                Placement::AfterCheck => v,
            });
        }
        s.outs.resize(edges.len(), (false, 0));
        min_sum(&s.ins, &mut s.outs);
        for (k, e) in edges.clone().enumerate() {
            if !mask.is_none_or(|m| m[e]) {
                continue;
            }
            let region = g.edge_region[e];
            let (neg, mag) = s.outs[k];
            let label = match placement {
                Placement::BeforeCheck => {
                    if neg {
                        -(mag as i8)
                    } else {
                        mag as i8
                    }
                }
                Placement::AfterCheck => t.quantize_signed(i, region, neg, mag),
            };
            let slot = e * g.z + p;
            t.store(
                i,
                region,
                &mut store.msg[slot],
                &mut store.side[slot],
                label,
            );
            let new = t.reconstruct(i, region, store.msg[slot], store.side[slot]);
            app[g.slot_vn[slot] as usize] = saturate(s.lv[k] as i32 + new as i32, wide);
        }
    }
}

/// Unquantized check outputs of layer `r` for training: `output` gets
/// `(slot, edge, negative, magnitude)` for each active location.
#[allow(clippy::too_many_arguments)]
pub fn layer_raw<O>(
    g: &SlotGraph,
    t: &Tables,
    i: usize,
    r: usize,
    mask: Option<&[bool]>,
    app: &[i16],
    store: &MessageStore,
    s: &mut LayerScratch,
    mut output: O,
) where
    O: FnMut(usize, usize, bool, i16),
{
    let max = t.llr_max();
    let edges = g.row_edges[r].clone();
    for p in 0..g.z {
        partial_vn(g, t, i, r, p, app, store, &mut s.lv);
        s.ins.clear();
        s.ins.extend(s.lv.iter().map(|&v| saturate(v as i32, max)));
        s.outs.resize(edges.len(), (false, 0));
        min_sum(&s.ins, &mut s.outs);
        for (k, e) in edges.clone().enumerate() {
            if mask.is_none_or(|m| m[e]) {
                let (neg, mag) = s.outs[k];
                output(e * g.z + p, e, neg, mag);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed::llr_max;

    #[test]
    fn app_register_is_wider_and_fits_i16() {
        for w in 4..=12 {
            let m = llr_max(w);
            assert!(app_max(m) >= 4 * m);
            assert!(app_max(m) + m <= i16::MAX as i32);
        }
    }
}
