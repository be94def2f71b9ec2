use super::base_graph::{BaseGraph, NO_EDGE};
use crate::{Error, Result};

/// One base edge. It holds `z` parallel messages after lifting: check
/// `row * z + p` is connected to variable `col * z + (p + shift) % z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseEdge {
    pub row: usize,
    pub col: usize,
    pub shift: usize,
}

/// A base graph lifted by factor `z`.
///
/// Edges are enumerated row-major at base-edge granularity, so edge `e`
/// owns the message slots `e * z .. (e + 1) * z` indexed by check position.
#[derive(Debug, Clone)]
pub struct LiftedCode {
    base: BaseGraph,
    z: usize,
    edges: Vec<BaseEdge>,
    row_edges: Vec<Vec<usize>>,
    col_edges: Vec<Vec<usize>>,
    punctured_vn: Vec<bool>,
}

impl LiftedCode {
    pub fn lift(base: &BaseGraph, z: usize) -> Result<Self> {
        if z == 0 {
            return Err(Error::Validation(
                "lifting factor must be at least 1".into(),
            ));
        }
        if z > base.z_max() {
            return Err(Error::Validation(format!(
                "lifting factor {z} exceeds the asset's z_max {}",
                base.z_max()
            )));
        }
        let mut edges = Vec::with_capacity(base.edge_count());
        let mut row_edges = vec![Vec::new(); base.rows()];
        let mut col_edges = vec![Vec::new(); base.cols()];
        for r in 0..base.rows() {
            for c in 0..base.cols() {
                let s = base.shift(r, c);
                if s == NO_EDGE {
                    continue;
                }
                let e = edges.len();
                edges.push(BaseEdge {
                    row: r,
                    col: c,
                    shift: s as usize % z,
                });
                row_edges[r].push(e);
                col_edges[c].push(e);
            }
        }
        let mut punctured_vn = vec![false; base.cols() * z];
        for &p in base.punctured() {
            punctured_vn[p * z..(p + 1) * z].fill(true);
        }
        Ok(LiftedCode {
            base: base.clone(),
            z,
            edges,
            row_edges,
            col_edges,
            punctured_vn,
        })
    }

    pub fn base(&self) -> &BaseGraph {
        &self.base
    }

    pub fn z(&self) -> usize {
        self.z
    }

    /// Code length including punctured bits.
    pub fn n(&self) -> usize {
        self.base.cols() * self.z
    }

    pub fn k(&self) -> usize {
        self.base.info_cols() * self.z
    }

    /// Number of lifted check nodes.
    pub fn checks(&self) -> usize {
        self.base.rows() * self.z
    }

    /// Number of transmitted code bits.
    pub fn transmitted_len(&self) -> usize {
        self.base.transmitted_cols() * self.z
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.transmitted_len() as f64
    }

    /// Number of base edges (memory locations).
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of lifted message slots.
    pub fn slot_count(&self) -> usize {
        self.edges.len() * self.z
    }

    pub fn edges(&self) -> &[BaseEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> BaseEdge {
        self.edges[e]
    }

    pub fn row_edges(&self, row: usize) -> &[usize] {
        &self.row_edges[row]
    }

    pub fn col_edges(&self, col: usize) -> &[usize] {
        &self.col_edges[col]
    }

    pub fn is_punctured(&self, vn: usize) -> bool {
        self.punctured_vn[vn]
    }

    pub fn punctured_mask(&self) -> &[bool] {
        &self.punctured_vn
    }

    /// Transmitted information bit; bit error rates are taken over these.
    pub fn is_scored(&self, vn: usize) -> bool {
        vn < self.k() && !self.punctured_vn[vn]
    }

    /// Number of transmitted information bits.
    pub fn scored_len(&self) -> usize {
        (0..self.k()).filter(|&v| self.is_scored(v)).count()
    }

    /// Variable node attached to slot `p` of edge `e`.
    #[inline]
    pub fn slot_vn(&self, e: usize, p: usize) -> usize {
        let edge = self.edges[e];
        edge.col * self.z + (p + edge.shift) % self.z
    }

    /// Check node attached to slot `p` of edge `e`.
    #[inline]
    pub fn slot_cn(&self, e: usize, p: usize) -> usize {
        self.edges[e].row * self.z + p
    }

    /// `H * bits` over GF(2).
    pub fn syndrome(&self, bits: &[u8]) -> Result<Vec<u8>> {
        if bits.len() != self.n() {
            return Err(Error::Length {
                expected: self.n(),
                got: bits.len(),
            });
        }
        let z = self.z;
        let mut syn = vec![0u8; self.checks()];
        for edge in &self.edges {
            let block = &bits[edge.col * z..(edge.col + 1) * z];
            let out = &mut syn[edge.row * z..(edge.row + 1) * z];
            for (p, o) in out.iter_mut().enumerate() {
                *o ^= block[(p + edge.shift) % z] & 1;
            }
        }
        Ok(syn)
    }

    /// True when every parity check is satisfied.
    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        let z = self.z;
        if bits.len() != self.n() {
            return false;
        }
        (0..self.base.rows()).all(|r| {
            (0..z).all(|p| {
                self.row_edges[r].iter().fold(0u8, |acc, &e| {
                    let edge = self.edges[e];
                    acc ^ bits[edge.col * z + (p + edge.shift) % z]
                }) == 0
            })
        })
    }

    /// Dense parity-check matrix, for tests and small codes only.
    pub fn dense_matrix(&self) -> Vec<Vec<u8>> {
        let mut h = vec![vec![0u8; self.n()]; self.checks()];
        for e in 0..self.edges.len() {
            for p in 0..self.z {
                h[self.slot_cn(e, p)][self.slot_vn(e, p)] = 1;
            }
        }
        h
    }
}
