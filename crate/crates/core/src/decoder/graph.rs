use std::ops::Range;

use crate::code::LiftedCode;

/// Flat view of a lifted code for the decoder inner loops.
///
/// Slot `e * z + p` is the message of base edge `e` at check position `p`.
#[derive(Debug, Clone)]
pub struct SlotGraph {
    pub z: usize,
    pub n: usize,
    pub slot_vn: Vec<u32>,
    /// Edges of each row; contiguous because edges are enumerated row-major.
    pub row_edges: Vec<Range<usize>>,
    pub edge_region: Vec<usize>,
    /// Bits that enter bit error counts (transmitted information bits).
    pub scored: Vec<bool>,
}

impl SlotGraph {
    pub fn new(code: &LiftedCode, edge_region: Vec<usize>) -> Self {
        let z = code.z();
        let mut slot_vn = Vec::with_capacity(code.slot_count());
        for e in 0..code.edge_count() {
            for p in 0..z {
                slot_vn.push(code.slot_vn(e, p) as u32);
            }
        }
        let row_edges = (0..code.base().rows())
            .map(|r| {
                let edges = code.row_edges(r);
                let range = edges[0]..edges[edges.len() - 1] + 1;
                debug_assert_eq!(range.len(), edges.len());
                range
            })
            .collect();
        assert_eq!(edge_region.len(), code.edge_count());
        SlotGraph {
            z,
            n: code.n(),
            slot_vn,
            row_edges,
            edge_region,
            scored: (0..code.n()).map(|v| code.is_scored(v)).collect(),
        }
    }

    pub fn slots(&self) -> usize {
        self.slot_vn.len()
    }

    pub fn rows(&self) -> usize {
        self.row_edges.len()
    }

    #[inline]
    pub fn edge_of(&self, slot: usize) -> usize {
        slot / self.z
    }
}

/// Extrinsic min-sum over one check.
///
/// `inputs` are signed values with zero counted as positive. Each output is
/// `(negative, magnitude)` of the product of the other signs and the
/// minimum of the other magnitudes. Uses the two-minima and sign-parity
/// trick, so every output costs O(1) after one pass.
#[inline]
pub fn min_sum(inputs: &[i16], outputs: &mut [(bool, i16)]) {
    debug_assert!(inputs.len() >= 2);
    let mut min1 = i16::MAX;
    let mut min2 = i16::MAX;
    let mut arg = 0;
    let mut parity = false;
    for (i, &v) in inputs.iter().enumerate() {
        let m = v.abs();
        parity ^= v < 0;
        if m < min1 {
            min2 = min1;
            min1 = m;
            arg = i;
        } else if m < min2 {
            min2 = m;
        }
    }
    for (i, (&v, out)) in inputs.iter().zip(outputs.iter_mut()).enumerate() {
        let mag = if i == arg { min2 } else { min1 };
        *out = (parity ^ (v < 0), mag);
    }
}
