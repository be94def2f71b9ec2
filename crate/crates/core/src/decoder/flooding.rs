//! Flooding schedule: all variable nodes, then all check nodes.

use super::graph::SlotGraph;
use super::tables::Tables;
use super::Placement;
use crate::fixed::saturate;

/// Memory locations of one frame.
#[derive(Debug, Clone)]
pub struct MessageStore {
    pub msg: Vec<i8>,
    /// Previous message (memory-assisted variant only; zero otherwise).
    pub side: Vec<i8>,
}

impl MessageStore {
    pub fn new(slots: usize) -> Self {
        MessageStore {
            msg: vec![0; slots],
            side: vec![0; slots],
        }
    }
}

/// Buffers reused across iterations.
#[derive(Debug, Clone)]
pub struct Scratch {
    pub rec: Vec<i16>,
    pub total: Vec<i32>,
    pub yv: Vec<i16>,
    pub app: Vec<i16>,
}

impl Scratch {
    pub fn new(g: &SlotGraph) -> Self {
        Scratch {
            rec: vec![0; g.slots()],
            total: vec![0; g.n],
            yv: vec![0; g.slots()],
            app: vec![0; g.n],
        }
    }
}

/// Variable node update with the tables of iteration `prev` (`None`
/// before any check message exists). Fills `yv` (extrinsic, per slot) and
/// `app` (per variable node), both saturated once from wide sums.
pub fn vn_phase(
    g: &SlotGraph,
    t: &Tables,
    prev: Option<usize>,
    ch: &[i16],
    store: &MessageStore,
    s: &mut Scratch,
) {
    let max = t.llr_max();
    match prev {
        Some(i) => {
            let z = g.z;
            for (e, &region) in g.edge_region.iter().enumerate() {
                let table = t.region(i, region);
                let range = e * z..(e + 1) * z;
                let rec = &mut s.rec[range.clone()];
                for ((r, &m), &sd) in rec
                    .iter_mut()
                    .zip(&store.msg[range.clone()])
                    .zip(&store.side[range])
                {
                    *r = table.reconstruct(m, sd);
                }
            }
        }
        None => s.rec.fill(0),
    }
    for (tot, &c) in s.total.iter_mut().zip(ch) {
        *tot = c as i32;
    }
    for (slot, &rec) in s.rec.iter().enumerate() {
        s.total[g.slot_vn[slot] as usize] += rec as i32;
    }
    for (slot, y) in s.yv.iter_mut().enumerate() {
        *y = saturate(s.total[g.slot_vn[slot] as usize] - s.rec[slot] as i32, max);
    }
    for (a, &tot) in s.app.iter_mut().zip(&s.total) {
        *a = saturate(tot, max);
    }
}

/// Runs min-sum over every check.
///
/// The `z` checks of a base row are processed side by side with the
/// two-minima rule of [`min_sum`](super::min_sum). `input(e, values)` fills
/// the `z` inputs of edge `e`; `output(e, negative, magnitude)` receives the
/// `z` outputs of every active edge.
pub fn check_pass<I, O>(
    g: &SlotGraph,
    rows: std::ops::Range<usize>,
    mask: Option<&[bool]>,
    mut input: I,
    mut output: O,
) where
    I: FnMut(usize, &mut [i16]),
    O: FnMut(usize, &[bool], &[i16]),
{
    let z = g.z;
    let mut ins = Vec::new();
    let mut min1 = vec![0i16; z];
    let mut min2 = vec![0i16; z];
    let mut arg = vec![0u16; z];
    let mut parity = vec![false; z];
    let mut neg = vec![false; z];
    let mut mag = vec![0i16; z];
    for r in rows {
        let edges = g.row_edges[r].clone();
        ins.resize(edges.len() * z, 0);
        min1.fill(i16::MAX);
        min2.fill(i16::MAX);
        parity.fill(false);
        for (k, e) in edges.clone().enumerate() {
            let row = &mut ins[k * z..(k + 1) * z];
            input(e, row);
            let k = k as u16;
            for ((((&v, m1), m2), a), par) in row
                .iter()
                .zip(min1.iter_mut())
                .zip(min2.iter_mut())
                .zip(arg.iter_mut())
                .zip(parity.iter_mut())
            {
                let m = v.abs();
                let lower = m < *m1;
                *m2 = if lower { *m1 } else { (*m2).min(m) };
                *m1 = (*m1).min(m);
                *a = if lower { k } else { *a };
                *par ^= v < 0;
            }
        }
        for (k, e) in edges.enumerate() {
            if !mask.is_none_or(|m| m[e]) {
                continue;
            }
            let row = &ins[k * z..(k + 1) * z];
            let k = k as u16;
            for p in 0..z {
                mag[p] = if arg[p] == k { min2[p] } else { min1[p] };
                neg[p] = parity[p] ^ (row[p] < 0);
            }
            output(e, &neg, &mag);
        }
    }
}

/// Writes the `z` outputs of edge `e` as signed labels.
#[inline]
fn signed_labels(neg: &[bool], mag: &[i16], out: &mut [i8]) {
    for ((o, &n), &m) in out.iter_mut().zip(neg).zip(mag) {
        *o = if n { -(m as i8) } else { m as i8 };
    }
}

/// Check node update of iteration `i` writing new messages into `store`.
pub fn cn_phase(
    g: &SlotGraph,
    t: &Tables,
    i: usize,
    mask: Option<&[bool]>,
    placement: Placement,
    yv: &[i16],
    store: &mut MessageStore,
) {
    let MessageStore { msg, side } = store;
    let z = g.z;
    let max = t.llr_max();
    let mut labels = vec![0i8; z];
    match placement {
        Placement::BeforeCheck => check_pass(
            g,
            0..g.rows(),
            mask,
            |e, ins| {
                let table = t.region(i, g.edge_region[e]);
                for (v, &y) in ins.iter_mut().zip(&yv[e * z..(e + 1) * z]) {
                    *v = table.quantize(y, max) as i16;
                }
            },
            |e, neg, mag| {
                let table = t.region(i, g.edge_region[e]);
                signed_labels(neg, mag, &mut labels);
                let range = e * z..(e + 1) * z;
                for ((m, sd), &l) in msg[range.clone()]
                    .iter_mut()
                    .zip(&mut side[range])
                    .zip(&labels)
                {
                    table.store(m, sd, l);
                }
            },
        ),
        Placement::AfterCheck => check_pass(
            g,
            0..g.rows(),
            mask,
            |e, ins| ins.copy_from_slice(&yv[e * z..(e + 1) * z]),
            |e, neg, mag| {
                let table = t.region(i, g.edge_region[e]);
                let range = e * z..(e + 1) * z;
                for (((m, sd), &n), &a) in msg[range.clone()]
                    .iter_mut()
                    .zip(&mut side[range])
                    .zip(neg)
                    .zip(mag)
                {
                    table.store(m, sd, table.quantize_signed(n, a, max));
                }
            },
        ),
    }
}
