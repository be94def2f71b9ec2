//! Information measures in bits, with the convention `0 log 0 = 0`.

use super::histogram::JointHistogram;

/// Binary entropy `H2(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    h(p) + h(1.0 - p)
}

/// `D_KL(p || q)` in bits; `+inf` when `p(x) > 0` and `q(x) = 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    p.iter()
        .zip(q)
        .map(|(&pi, &qi)| {
            if pi <= 0.0 {
                0.0
            } else if qi <= 0.0 {
                f64::INFINITY
            } else {
                pi * (pi / qi).log2()
            }
        })
        .sum()
}

/// `I(X; Y)` from per-`y` pairs `[p(x=0, y), p(x=1, y)]`.
pub fn mi_from_pairs(pairs: &[[f64; 2]]) -> f64 {
    let total: f64 = pairs.iter().map(|p| p[0] + p[1]).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let px = pairs
        .iter()
        .fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
    let mut mi = 0.0;
    for p in pairs {
        let py = p[0] + p[1];
        for x in 0..2 {
            if p[x] > 0.0 {
                mi += p[x] * (p[x] * total / (px[x] * py)).log2();
            }
        }
    }
    mi / total
}

/// `I(X; Y)` with the side information marginalized out.
pub fn mutual_information(p: &JointHistogram) -> f64 {
    mi_from_pairs(&p.xy_marginal())
}

/// `I(X; Y | S) = sum_s p(s) I(X; Y | S = s)`.
pub fn conditional_mi(p: &JointHistogram) -> f64 {
    let mut total = 0.0;
    let mut pairs = vec![[0.0; 2]; p.ny()];
    for s in 0..p.ns() {
        for (y, slot) in pairs.iter_mut().enumerate() {
            *slot = p.pair(y, s);
        }
        let ps: f64 = pairs.iter().map(|q| q[0] + q[1]).sum();
        if ps > 0.0 {
            total += ps * mi_from_pairs(&pairs);
        }
    }
    total
}

/// `I(X; (Y, S))`, the information in observation and side information together.
pub fn joint_mi(p: &JointHistogram) -> f64 {
    let pairs: Vec<[f64; 2]> = (0..p.ny())
        .flat_map(|y| (0..p.ns()).map(move |s| (y, s)))
        .map(|(y, s)| p.pair(y, s))
        .collect();
    mi_from_pairs(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(ny: usize, ns: usize, w: &[f64]) -> JointHistogram {
        JointHistogram::from_weights(ny, ns, w).unwrap()
    }

    #[test]
    fn independent_is_zero_and_deterministic_is_one() {
        let indep = hist(2, 1, &[0.1, 0.1, 0.4, 0.4]);
        assert!(mutual_information(&indep).abs() < 1e-15);
        let det = hist(2, 1, &[0.5, 0.0, 0.0, 0.5]);
        assert!((mutual_information(&det) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bsc_value() {
        // p(x, y) = [[0.4, 0.1], [0.1, 0.4]]
        let p = hist(2, 1, &[0.4, 0.1, 0.1, 0.4]);
        let expected = 1.0 - binary_entropy(0.2);
        assert!((mutual_information(&p) - expected).abs() < 1e-12);
        assert!((expected - 0.278_071_9).abs() < 1e-6);
    }

    #[test]
    fn kl_values() {
        assert_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
        assert!((kl_divergence(&[1.0, 0.0], &[0.5, 0.5]) - 1.0).abs() < 1e-15);
        let expected = 1.0 - binary_entropy(0.2);
        assert!((kl_divergence(&[0.8, 0.2], &[0.5, 0.5]) - expected).abs() < 1e-12);
        assert!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).is_infinite());
    }

    #[test]
    fn conditional_mi_edge_cases() {
        let p = hist(2, 1, &[0.4, 0.1, 0.1, 0.4]);
        assert_eq!(conditional_mi(&p), mutual_information(&p));
        // side information equal to x: s = 0 iff x = 0
        let w = [0.3, 0.0, 0.0, 0.2, 0.2, 0.0, 0.0, 0.3];
        let revealed = hist(2, 2, &w);
        assert!(conditional_mi(&revealed).abs() < 1e-15);
    }

    #[test]
    fn conditional_mi_matches_direct_summation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let w: Vec<f64> = (0..2 * 6 * 3).map(|_| rng.random::<f64>()).collect();
            let p = hist(6, 3, &w);
            // I(X;Y|S) = sum p(x,y,s) log p(x,y,s) p(s) / (p(x,s) p(y,s))
            let mut direct = 0.0;
            for s in 0..3 {
                let ps: f64 = (0..6).map(|y| p.get(0, y, s) + p.get(1, y, s)).sum();
                for x in 0..2 {
                    let pxs: f64 = (0..6).map(|y| p.get(x, y, s)).sum();
                    for y in 0..6 {
                        let pys = p.get(0, y, s) + p.get(1, y, s);
                        let pxys = p.get(x, y, s);
                        direct += pxys * (pxys * ps / (pxs * pys)).log2();
                    }
                }
            }
            assert!((conditional_mi(&p) - direct).abs() < 1e-12);
        }
    }
}
