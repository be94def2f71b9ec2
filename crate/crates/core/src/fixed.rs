//! Fixed-point conventions shared by the design pipeline and the decoders.
//!
//! Integer LLRs of width `w'` live in the symmetric range
//! `[-(2^(w'-1) - 1), 2^(w'-1) - 1]`. Quantized messages of width `w` take
//! the sign-magnitude labels `{-2^(w-1), .., -1, 1, .., 2^(w-1)}`; the label
//! `0` is reserved for "no message yet" and always reconstructs to zero.

/// Largest magnitude representable by a `width`-bit integer LLR.
#[inline]
pub fn llr_max(width: u32) -> i32 {
    (1 << (width - 1)) - 1
}

/// Clamps `value` into `[-max, max]`.
#[inline]
pub fn saturate(value: i32, max: i32) -> i16 {
    value.clamp(-max, max) as i16
}

/// Half-size of a `width`-bit message alphabet, i.e. its largest label.
#[inline]
pub fn message_levels(width: u32) -> i32 {
    1 << (width - 1)
}

/// Checks that a message label fits a `width`-bit alphabet (0 allowed).
#[inline]
pub fn message_fits(label: i32, width: u32) -> bool {
    label.abs() <= message_levels(width)
}

/// Signed-magnitude grid of unquantized check node outputs.
///
/// A min-sum output is a sign and a magnitude in `0..=max`; zero keeps its
/// sign so that the grid is mirror symmetric. Index `i` and
/// `len() - 1 - i` are negatives of each other. Negative values occupy the
/// lower half in ascending signed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedGrid {
    max: i32,
}

impl SignedGrid {
    pub fn new(max: i32) -> Self {
        assert!(max >= 0);
        SignedGrid { max }
    }

    pub fn for_width(width: u32) -> Self {
        Self::new(llr_max(width))
    }

    pub fn max(&self) -> i32 {
        self.max
    }

    #[inline]
    pub fn len(&self) -> usize {
        2 * (self.max as usize + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of a value with the given sign and magnitude.
    #[inline]
    pub fn index(&self, negative: bool, magnitude: i32) -> usize {
        debug_assert!(magnitude >= 0 && magnitude <= self.max);
        if negative {
            (self.max - magnitude) as usize
        } else {
            (self.max + 1 + magnitude) as usize
        }
    }

    /// Index of a plain integer; zero counts as positive.
    #[inline]
    pub fn index_of(&self, value: i32) -> usize {
        self.index(value < 0, value.abs())
    }

    /// `(negative, magnitude)` of an index.
    #[inline]
    pub fn value(&self, index: usize) -> (bool, i32) {
        let half = self.max as usize + 1;
        if index < half {
            (true, (half - 1 - index) as i32)
        } else {
            (false, (index - half) as i32)
        }
    }

    #[inline]
    pub fn mirror(&self, index: usize) -> usize {
        self.len() - 1 - index
    }
}

/// Index of a message label in the dense alphabet `[-half, half]`.
#[inline]
pub fn label_index(label: i32, half: i32) -> usize {
    (label + half) as usize
}

/// Label of cluster `k` out of `n` sign-symmetric clusters.
///
/// Clusters `0..n/2` carry the negative labels `-n/2..=-1` and clusters
/// `n/2..n` the positive labels `1..=n/2`.
#[inline]
pub fn cluster_label(k: usize, n: usize) -> i32 {
    let half = (n / 2) as i32;
    let k = k as i32;
    if k < half {
        k - half
    } else {
        k - half + 1
    }
}

/// Inverse of [`cluster_label`].
#[inline]
pub fn label_cluster(label: i32, n: usize) -> usize {
    debug_assert!(label != 0);
    let half = (n / 2) as i32;
    if label < 0 {
        (label + half) as usize
    } else {
        (label + half - 1) as usize
    }
}

/// Round half away from zero, which keeps odd symmetry of tables.
#[inline]
pub fn round_llr(value: f64, scale: f64, max: i32) -> i16 {
    if value.is_nan() {
        return 0;
    }
    let scaled = value * scale;
    if scaled >= max as f64 {
        return max as i16;
    }
    if scaled <= -(max as f64) {
        return -max as i16;
    }
    scaled.round() as i16
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_mirror_negates() {
        let g = SignedGrid::for_width(6);
        assert_eq!(g.len(), 64);
        for i in 0..g.len() {
            let (n, m) = g.value(i);
            let (mn, mm) = g.value(g.mirror(i));
            assert_eq!(m, mm);
            assert_ne!(n, mn);
            assert_eq!(g.index(n, m), i);
        }
        assert!(g.index_of(-3) < g.index_of(-0) && g.index_of(0) < g.index_of(3));
    }

    #[test]
    fn labels_round_trip() {
        for n in [2usize, 4, 8, 16] {
            let labels: Vec<i32> = (0..n).map(|k| cluster_label(k, n)).collect();
            assert!(labels.windows(2).all(|w| w[0] < w[1]));
            assert!(!labels.contains(&0));
            for k in 0..n {
                assert_eq!(label_cluster(cluster_label(k, n), n), k);
                assert_eq!(cluster_label(n - 1 - k, n), -cluster_label(k, n));
            }
        }
    }

    #[test]
    fn saturation_and_rounding() {
        assert_eq!(saturate(300, 127), 127);
        assert_eq!(saturate(-300, 127), -127);
        assert_eq!(round_llr(2.5, 1.0, 127), 3);
        assert_eq!(round_llr(-2.5, 1.0, 127), -3);
        assert_eq!(round_llr(f64::INFINITY, 1.0, 127), 127);
        assert_eq!(llr_max(8), 127);
    }
}
