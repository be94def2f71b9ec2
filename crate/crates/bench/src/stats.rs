//! Confidence intervals and curve interpolation.

use statrs::distribution::{Beta, ContinuousCDF};

/// Exact two-sided Clopper-Pearson interval for `k` successes in `n` trials.
pub fn clopper_pearson(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    assert!(k <= n && n > 0, "need 0 <= k <= n and n > 0");
    let alpha = 1.0 - confidence;
    let (k, n) = (k as f64, n as f64);
    let lo = if k == 0.0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let hi = if k == n {
        1.0
    } else {
        Beta::new(k + 1.0, n - k)
            .unwrap()
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Eb/N0 at which an error-rate curve crosses `target`, by linear
/// interpolation of `log10(rate)` between the first bracketing pair of points
/// (sorted by Eb/N0). `None` if the curve never crosses.
pub fn crossing(points: &[(f64, f64)], target: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let t = target.log10();
    pts.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        let (l0, l1) = (y0.log10(), y1.log10());
        if (l0 - t) * (l1 - t) > 0.0 || l0 == l1 {
            return None;
        }
        Some(x0 + (t - l0) * (x1 - x0) / (l1 - l0))
    })
}

/// `1 - H2(p)`.
pub fn bsc_capacity(p: f64) -> f64 {
    1.0 - maqd_core::ib::binary_entropy(p)
}

/// Plug-in `1 - H2(p)` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub p: f64,
    pub mi: f64,
    pub mi_sd: f64,
}

/// Estimate from per-frame error counts `e_f` over `frames` frames of
/// `bits` scored bits: `sum = sum e_f`, `sum_sq = sum e_f^2`. The standard
/// error uses the frame-to-frame spread, so errors clustered in failed
/// frames widen it, and the delta method `|d(1 - H2)/dp| = |log2((1-p)/p)|`.
pub fn error_rate_estimate(sum: u64, sum_sq: u128, frames: u64, bits: u64) -> MiEstimate {
    let f = frames as f64;
    let b = bits as f64;
    let p = sum as f64 / (f * b);
    let mean = sum as f64 / f;
    let var = (sum_sq as f64 / f - mean * mean).max(0.0) / (b * b);
    let sd_p = (var / f).sqrt();
    let slope = if p > 0.0 && p < 1.0 {
        ((1.0 - p) / p).log2().abs()
    } else {
        0.0
    };
    MiEstimate {
        p,
        mi: bsc_capacity(p),
        mi_sd: slope * sd_p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clopper_pearson_reference_values() {
        // values from the closed forms at the boundaries and a textbook case
        let (lo, hi) = clopper_pearson(0, 10, 0.95);
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-9);
        let (lo, hi) = clopper_pearson(10, 10, 0.95);
        assert!((lo - 0.025f64.powf(0.1)).abs() < 1e-9);
        assert_eq!(hi, 1.0);
        let (lo, hi) = clopper_pearson(5, 20, 0.95);
        assert!((lo - 0.086571).abs() < 1e-5, "{lo}");
        assert!((hi - 0.491046).abs() < 1e-5, "{hi}");
    }

    #[test]
    fn interval_covers_the_estimate_and_shrinks() {
        let mut width = f64::INFINITY;
        for n in [100u64, 1000, 10_000] {
            let (lo, hi) = clopper_pearson(n / 10, n, 0.95);
            assert!(lo < 0.1 && 0.1 < hi);
            assert!(hi - lo < width);
            width = hi - lo;
        }
    }

    #[test]
    fn plug_in_estimator_on_synthetic_bsc_data() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let (frames, bits) = (2000u64, 500u64);
        let mut z_scores = Vec::new();
        for &p in &[0.001, 0.01, 0.05, 0.2] {
            for _ in 0..20 {
                let (mut sum, mut sq) = (0u64, 0u128);
                for _ in 0..frames {
                    let e = (0..bits).filter(|_| rng.random_bool(p)).count() as u64;
                    sum += e;
                    sq += (e * e) as u128;
                }
                let est = error_rate_estimate(sum, sq, frames, bits);
                // binomial standard error of p_hat, mapped through the slope
                let sd = (p * (1.0 - p) / (frames * bits) as f64).sqrt() * ((1.0 - p) / p).log2();
                assert!(
                    (est.mi_sd / sd - 1.0).abs() < 0.15,
                    "p={p}: {} vs {sd}",
                    est.mi_sd
                );
                z_scores.push((est.mi - bsc_capacity(p)) / sd);
            }
        }
        let within = z_scores.iter().filter(|z| z.abs() < 3.0).count();
        assert!(within >= z_scores.len() - 1, "{z_scores:?}");
        let mean = z_scores.iter().sum::<f64>() / z_scores.len() as f64;
        assert!(mean.abs() < 0.7, "biased: {mean}");
    }

    #[test]
    fn estimator_edge_cases() {
        let e = error_rate_estimate(0, 0, 10, 100);
        assert_eq!((e.p, e.mi, e.mi_sd), (0.0, 1.0, 0.0));
        let e = error_rate_estimate(500, 25_000, 10, 100);
        assert_eq!(e.mi, 0.0);
    }

    #[test]
    fn crossing_interpolates_in_log_domain() {
        let pts = [(1.0, 1e-1), (2.0, 1e-3), (3.0, 1e-5)];
        assert!((crossing(&pts, 1e-2).unwrap() - 1.5).abs() < 1e-12);
        assert!((crossing(&pts, 1e-4).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(crossing(&pts, 1.0), None);
        assert_eq!(crossing(&[(1.0, 0.5)], 0.5), None);
    }
}
