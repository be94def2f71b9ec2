use crate::{Error, Result};

/// Empirical joint distribution `p(x, y, s)` with binary `x`.
///
/// `y` is the observation to be compressed and `s` the side information.
/// A plain `p(x, y)` is the special case of a single side symbol. Mass is
/// stored as `[(y * ns + s) * 2 + x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointHistogram {
    ny: usize,
    ns: usize,
    mass: Vec<f64>,
    y_values: Vec<f64>,
    s_values: Vec<i32>,
}

/// Tolerance on the total mass of a normalized histogram.
pub const NORMALIZATION_TOL: f64 = 1e-12;

impl JointHistogram {
    /// Wraps an already normalized mass array.
    pub fn new(ny: usize, ns: usize, mass: Vec<f64>) -> Result<Self> {
        if ny == 0 || ns == 0 {
            return Err(Error::Validation(
                "histogram alphabets must be non-empty".into(),
            ));
        }
        if mass.len() != 2 * ny * ns {
            return Err(Error::Length {
                expected: 2 * ny * ns,
                got: mass.len(),
            });
        }
        if mass.iter().any(|&m| !m.is_finite() || m < 0.0) {
            return Err(Error::Validation(
                "histogram mass must be finite and >= 0".into(),
            ));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Validation(format!(
                "histogram total mass {total} is not 1"
            )));
        }
        Ok(JointHistogram {
            ny,
            ns,
            mass,
            y_values: (0..ny).map(|y| y as f64).collect(),
            s_values: (0..ns as i32).collect(),
        })
    }

    /// Normalizes nonnegative weights (e.g. integer counts).
    pub fn from_weights(ny: usize, ns: usize, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::Degenerate("histogram has no mass".into()));
        }
        Self::new(ny, ns, weights.iter().map(|w| w / total).collect())
    }

    /// Builds from integer counts, normalizing once.
    pub fn from_counts(ny: usize, ns: usize, counts: &[u64]) -> Result<Self> {
        let weights: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        Self::from_weights(ny, ns, &weights)
    }

    pub fn with_values(mut self, y_values: Vec<f64>, s_values: Vec<i32>) -> Self {
        assert_eq!(y_values.len(), self.ny);
        assert_eq!(s_values.len(), self.ns);
        self.y_values = y_values;
        self.s_values = s_values;
        self
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn ns(&self) -> usize {
        self.ns
    }

    pub fn y_values(&self) -> &[f64] {
        &self.y_values
    }

    pub fn s_values(&self) -> &[i32] {
        &self.s_values
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, s: usize) -> f64 {
        self.mass[(y * self.ns + s) * 2 + x]
    }

    /// `[p(x=0, y, s), p(x=1, y, s)]`.
    #[inline]
    pub fn pair(&self, y: usize, s: usize) -> [f64; 2] {
        let i = (y * self.ns + s) * 2;
        [self.mass[i], self.mass[i + 1]]
    }

    /// `p(x, y)` marginalized over the side information.
    pub fn xy_marginal(&self) -> Vec<[f64; 2]> {
        (0..self.ny)
            .map(|y| {
                (0..self.ns).fold([0.0, 0.0], |acc, s| {
                    let p = self.pair(y, s);
                    [acc[0] + p[0], acc[1] + p[1]]
                })
            })
            .collect()
    }

    /// Mass of each `y` summed over `x` and `s`.
    pub fn y_marginal(&self) -> Vec<f64> {
        self.xy_marginal().iter().map(|p| p[0] + p[1]).collect()
    }

    /// Number of `y` with positive mass.
    pub fn support_size(&self) -> usize {
        self.y_marginal().iter().filter(|&&m| m > 0.0).count()
    }

    /// Keeps only the listed `y` indices (in the given order), renormalizing.
    pub fn select_y(&self, ys: &[usize]) -> Result<Self> {
        let mut weights = Vec::with_capacity(2 * ys.len() * self.ns);
        for &y in ys {
            for s in 0..self.ns {
                weights.extend_from_slice(&self.pair(y, s));
            }
        }
        let values = ys.iter().map(|&y| self.y_values[y]).collect();
        Ok(Self::from_weights(ys.len(), self.ns, &weights)?
            .with_values(values, self.s_values.clone()))
    }

    /// Checks `p(x, y, s) = p(1 - x, mirror(y), sigma(s))` with the index
    /// mirrors `y -> ny - 1 - y` and `s -> ns - 1 - s`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.ny).all(|y| {
            (0..self.ns).all(|s| {
                let a = self.pair(y, s);
                let b = self.pair(self.ny - 1 - y, self.ns - 1 - s);
                (a[0] - b[1]).abs() <= tol && (a[1] - b[0]).abs() <= tol
            })
        })
    }

    /// Averages the histogram with its mirror image.
    pub fn symmetrized(&self) -> Self {
        let mut mass = vec![0.0; self.mass.len()];
        for y in 0..self.ny {
            for s in 0..self.ns {
                let a = self.pair(y, s);
                let b = self.pair(self.ny - 1 - y, self.ns - 1 - s);
                let i = (y * self.ns + s) * 2;
                mass[i] = 0.5 * (a[0] + b[1]);
                mass[i + 1] = 0.5 * (a[1] + b[0]);
            }
        }
        JointHistogram {
            mass,
            ..self.clone()
        }
    }
}
