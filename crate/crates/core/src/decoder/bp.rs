//! Full-precision sum-product baseline.

use super::graph::SlotGraph;
use super::DecodeResult;
use crate::code::LiftedCode;

/// Exact box-plus `2 atanh(tanh(a/2) tanh(b/2))` in the form
/// `sign(a) sign(b) min(|a|, |b|) + ln(1 + e^-|a+b|) - ln(1 + e^-|a-b|)`.
#[inline]
pub fn boxplus(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let m = a.abs().min(b.abs());
    let corr = |x: f64| {
        if x.is_finite() {
            (-x.abs()).exp().ln_1p()
        } else {
            0.0
        }
    };
    sign * m + corr(a + b) - corr(a - b)
}

/// Cap on message magnitudes; keeps sums finite.
const LLR_CAP: f32 = 1.0e4;

/// Flooding sum-product with 32-bit float messages.
pub fn decode_bp(
    code: &LiftedCode,
    llrs: &[f64],
    max_iter: usize,
    early_termination: bool,
    reference: Option<&[u8]>,
) -> DecodeResult {
    let g = SlotGraph::new(code, vec![0; code.edge_count()]);
    let ch: Vec<f32> = llrs
        .iter()
        .map(|&l| (l as f32).clamp(-LLR_CAP, LLR_CAP))
        .collect();
    let mut c2v = vec![0f32; g.slots()];
    let mut v2c = vec![0f32; g.slots()];
    let mut total = vec![0f32; g.n];
    let mut bits = vec![0u8; g.n];
    let mut errors = Vec::new();
    let mut used = 0;
    let mut converged = false;

    let decide = |total: &[f32], bits: &mut [u8]| {
        for (b, &t) in bits.iter_mut().zip(total) {
            *b = (t < 0.0) as u8;
        }
    };
    let count = |bits: &[u8], errors: &mut Vec<u32>| {
        if let Some(r) = reference {
            errors.push(super::bit_errors(&g, bits, r));
        }
    };

    total.copy_from_slice(&ch);
    decide(&total, &mut bits);
    count(&bits, &mut errors);

    let z = g.z;
    let mut fwd = Vec::new();
    let mut bwd = Vec::new();
    for it in 0..max_iter {
        for (slot, m) in v2c.iter_mut().enumerate() {
            *m = total[g.slot_vn[slot] as usize] - c2v[slot];
        }
        for r in 0..g.rows() {
            let edges = g.row_edges[r].clone();
            let d = edges.len();
            for p in 0..z {
                let inp = |k: usize| v2c[(edges.start + k) * z + p] as f64;
                fwd.clear();
                bwd.clear();
                fwd.push(f64::INFINITY);
                for k in 0..d {
                    let last = *fwd.last().unwrap();
                    fwd.push(boxplus(last, inp(k)));
                }
                bwd.resize(d + 1, f64::INFINITY);
                for k in (0..d).rev() {
                    bwd[k] = boxplus(bwd[k + 1], inp(k));
                }
                for k in 0..d {
                    let out = boxplus(fwd[k], bwd[k + 1]) as f32;
                    c2v[(edges.start + k) * z + p] = out.clamp(-LLR_CAP, LLR_CAP);
                }
            }
        }
        used = it + 1;
        total.copy_from_slice(&ch);
        for (slot, &m) in c2v.iter().enumerate() {
            total[g.slot_vn[slot] as usize] += m;
        }
        decide(&total, &mut bits);
        count(&bits, &mut errors);
        if early_termination && code.is_codeword(&bits) {
            converged = true;
            break;
        }
    }
    if !converged {
        converged = code.is_codeword(&bits);
    }
    if reference.is_some() {
        let last = *errors.last().unwrap();
        errors.resize(max_iter + 1, last);
    }
    DecodeResult {
        bits,
        iterations: used,
        converged,
        errors,
        messages: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logaddexp(a: f64, b: f64) -> f64 {
        let m = a.max(b);
        m + ((a - m).exp() + (b - m).exp()).ln()
    }

    #[test]
    fn boxplus_matches_log_domain_oracle() {
        let mut worst = 0.0f64;
        let steps = 400;
        for i in 0..=steps {
            for j in 0..=steps {
                let a = -20.0 + 40.0 * i as f64 / steps as f64;
                let b = -20.0 + 40.0 * j as f64 / steps as f64;
                let oracle = logaddexp(0.0, a + b) - logaddexp(a, b);
                worst = worst.max((boxplus(a, b) - oracle).abs());
            }
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn boxplus_identity_element() {
        for a in [-7.5, -0.1, 0.0, 3.2, 19.0] {
            assert_eq!(boxplus(a, f64::INFINITY), a);
            assert_eq!(boxplus(f64::INFINITY, a), a);
        }
        assert_eq!(boxplus(2.0, f64::NEG_INFINITY), -2.0);
    }
}
