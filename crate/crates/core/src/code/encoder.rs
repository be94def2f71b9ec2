use super::lifted::LiftedCode;
use crate::{Error, Result};

/// Codeword of a lifted code; `bits` has length `n` including punctured bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub bits: Vec<u8>,
}

/// Systematic encoder.
///
/// The leading "core" rows are solved with a precomputed dense GF(2)
/// inverse over their parity columns; every later row is an extension row
/// whose single new parity block follows by forward substitution. For 5G
/// base graphs the core is the 4-row double-diagonal block. Toy graphs
/// without that structure end up entirely in the core.
#[derive(Debug, Clone)]
pub struct Encoder {
    code: LiftedCode,
    core_rows: usize,
    words: usize,
    core_inverse: Vec<Vec<u64>>,
}

fn get_bit(v: &[u64], i: usize) -> bool {
    v[i / 64] >> (i % 64) & 1 == 1
}

fn flip_bit(v: &mut [u64], i: usize) {
    v[i / 64] ^= 1 << (i % 64);
}

/// Gauss-Jordan inverse over GF(2) of a square bit matrix.
fn invert_gf2(mut a: Vec<Vec<u64>>, n: usize) -> Option<Vec<Vec<u64>>> {
    let words = n.div_ceil(64);
    let mut inv: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            let mut row = vec![0u64; words];
            flip_bit(&mut row, i);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| get_bit(&a[r], col))?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let (pa, pi) = (a[col].clone(), inv[col].clone());
        for r in 0..n {
            if r != col && get_bit(&a[r], col) {
                a[r].iter_mut().zip(&pa).for_each(|(x, y)| *x ^= y);
                inv[r].iter_mut().zip(&pi).for_each(|(x, y)| *x ^= y);
            }
        }
    }
    Some(inv)
}

impl Encoder {
    pub fn new(code: &LiftedCode) -> Result<Self> {
        let base = code.base();
        let z = code.z();
        let g = base.core_rows();
        let info = base.info_cols();
        let n = g * z;
        let words = n.div_ceil(64);
        // core matrix restricted to the first g parity columns
        let mut core = vec![vec![0u64; words]; n];
        for r in 0..g {
            for &e in code.row_edges(r) {
                let edge = code.edge(e);
                if edge.col < info {
                    continue;
                }
                let pc = edge.col - info;
                for p in 0..z {
                    let col = pc * z + (p + edge.shift) % z;
                    flip_bit(&mut core[r * z + p], col);
                }
            }
        }
        let core_inverse = invert_gf2(core, n).ok_or(Error::RankDeficient)?;
        Ok(Encoder {
            code: code.clone(),
            core_rows: g,
            words,
            core_inverse,
        })
    }

    pub fn code(&self) -> &LiftedCode {
        &self.code
    }

    pub fn encode(&self, info_bits: &[u8]) -> Result<Codeword> {
        let code = &self.code;
        let z = code.z();
        let info = code.base().info_cols();
        if info_bits.len() != code.k() {
            return Err(Error::Length {
                expected: code.k(),
                got: info_bits.len(),
            });
        }
        let mut bits = vec![0u8; code.n()];
        bits[..code.k()].copy_from_slice(info_bits);

        let g = self.core_rows;
        let mut rhs = vec![0u64; self.words];
        for r in 0..g {
            for &e in code.row_edges(r) {
                let edge = code.edge(e);
                if edge.col >= info {
                    continue;
                }
                for p in 0..z {
                    if bits[edge.col * z + (p + edge.shift) % z] & 1 == 1 {
                        flip_bit(&mut rhs, r * z + p);
                    }
                }
            }
        }
        for (i, row) in self.core_inverse.iter().enumerate() {
            let parity = row
                .iter()
                .zip(&rhs)
                .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
                & 1;
            bits[info * z + i] = parity as u8;
        }
        for r in g..code.base().rows() {
            let target = info + r;
            let mut block = vec![0u8; z];
            for &e in code.row_edges(r) {
                let edge = code.edge(e);
                if edge.col == target {
                    continue;
                }
                for (p, b) in block.iter_mut().enumerate() {
                    *b ^= bits[edge.col * z + (p + edge.shift) % z];
                }
            }
            bits[target * z..(target + 1) * z].copy_from_slice(&block);
        }
        Ok(Codeword { bits })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{BaseGraph, LoadOptions};
    use rand::{Rng, SeedableRng};

    fn toy() -> BaseGraph {
        BaseGraph::parse("2 4 2 4\n0 -1 0 0\n-1 1 0 -1\n", LoadOptions::default()).unwrap()
    }

    /// Brute-force GF(2) solver: parity bits solving H b = 0 given info bits.
    fn elimination_oracle(h: &[Vec<u8>], info: &[u8]) -> Vec<u8> {
        let n = h[0].len();
        let k = info.len();
        let m = n - k;
        // rows: [H_parity | H_info * u]
        let mut a: Vec<Vec<u8>> = h
            .iter()
            .map(|row| {
                let mut r = row[k..].to_vec();
                r.push(row[..k].iter().zip(info).fold(0, |s, (x, y)| s ^ (x & y)));
                r
            })
            .collect();
        for col in 0..m {
            let piv = (col..a.len()).find(|&r| a[r][col] == 1).expect("full rank");
            a.swap(col, piv);
            let pr = a[col].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != col && row[col] == 1 {
                    row.iter_mut().zip(&pr).for_each(|(x, y)| *x ^= y);
                }
            }
        }
        let mut b = info.to_vec();
        b.extend((0..m).map(|i| a[i][m]));
        b
    }

    #[test]
    fn toy_encoding_matches_elimination() {
        let code = LiftedCode::lift(&toy(), 1).unwrap();
        let enc = Encoder::new(&code).unwrap();
        let cw = enc.encode(&[1, 0]).unwrap();
        assert_eq!(cw.bits, elimination_oracle(&code.dense_matrix(), &[1, 0]));
        assert_eq!(cw.bits, vec![1, 0, 0, 1]);
        for u in [[0, 0], [0, 1], [1, 1]] {
            let cw = enc.encode(&u).unwrap();
            assert_eq!(cw.bits, elimination_oracle(&code.dense_matrix(), &u));
        }
    }

    #[test]
    fn zero_info_gives_zero_codeword() {
        let code = LiftedCode::lift(&BaseGraph::nr_bg1_set0(), 16).unwrap();
        let enc = Encoder::new(&code).unwrap();
        let cw = enc.encode(&vec![0; code.k()]).unwrap();
        assert!(cw.bits.iter().all(|&b| b == 0));
    }

    #[test]
    fn bg1_codewords_have_zero_syndrome() {
        let bg = BaseGraph::nr_bg1_set0();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (rate, z) in [((1, 3), 32), ((2, 3), 32), ((11, 12), 16)] {
            let adapted = bg
                .rate_adapt(crate::code::Rate::new(rate.0, rate.1))
                .unwrap();
            let code = LiftedCode::lift(&adapted, z).unwrap();
            let enc = Encoder::new(&code).unwrap();
            for _ in 0..1000 {
                let u: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
                let cw = enc.encode(&u).unwrap();
                assert_eq!(&cw.bits[..code.k()], &u[..]);
                assert!(code.syndrome(&cw.bits).unwrap().iter().all(|&s| s == 0));
            }
        }
    }

    #[test]
    fn full_size_bg1_encodes() {
        let code = LiftedCode::lift(&BaseGraph::nr_bg1_set1(), 384).unwrap();
        let enc = Encoder::new(&code).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let u: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        assert!(code.is_codeword(&enc.encode(&u).unwrap().bits));
    }

    #[test]
    fn singular_core_is_reported() {
        // both parity columns identical -> singular
        let bg = BaseGraph::parse("2 4 2 4\n0 0 0 0\n0 0 0 0\n", LoadOptions::default()).unwrap();
        let code = LiftedCode::lift(&bg, 1).unwrap();
        assert!(matches!(Encoder::new(&code), Err(Error::RankDeficient)));
    }

    #[test]
    fn wrong_info_length() {
        let code = LiftedCode::lift(&toy(), 1).unwrap();
        let enc = Encoder::new(&code).unwrap();
        assert!(matches!(enc.encode(&[1]), Err(Error::Length { .. })));
    }
}
