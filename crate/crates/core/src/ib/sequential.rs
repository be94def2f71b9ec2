//! Sequential information bottleneck with side information.
//!
//! The optimizer searches sign-symmetric threshold quantizers of an
//! LLR-sorted observation alphabet. Starting from random symmetric
//! boundaries it repeatedly pulls the element next to a boundary (and its
//! mirror) out into two temporary singleton clusters and merges them back
//! into whichever neighbouring cluster loses the least `I(X; T | S)`.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;

use super::histogram::JointHistogram;
use super::measures::conditional_mi;
use crate::rng::{domain, substream};
use crate::{Error, Result};

/// Default number of random initializations.
pub const DEFAULT_INITS: usize = 500;

/// Cost differences below this are treated as ties (element stays).
const COST_TIE_EPS: f64 = 1e-15;

const MAX_SWEEPS: usize = 10_000;

/// Deterministic threshold clustering of `0..ny` into `n` clusters.
///
/// Cluster `k` holds `boundaries[k]..boundaries[k + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clustering {
    boundaries: Vec<usize>,
}

impl Clustering {
    pub fn new(boundaries: Vec<usize>) -> Result<Self> {
        if boundaries.len() < 2 || boundaries[0] != 0 {
            return Err(Error::Validation("boundaries must start at 0".into()));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("clusters must be non-empty".into()));
        }
        Ok(Clustering { boundaries })
    }

    /// Each element in its own cluster.
    pub fn identity(ny: usize) -> Self {
        Clustering {
            boundaries: (0..=ny).collect(),
        }
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn clusters(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn ny(&self) -> usize {
        *self.boundaries.last().unwrap()
    }

    /// Cluster index of element `y`.
    pub fn cluster_of(&self, y: usize) -> usize {
        self.boundaries.partition_point(|&b| b <= y) - 1
    }

    /// `boundaries[k] + boundaries[n - k] == ny` for all `k`.
    pub fn is_symmetric(&self) -> bool {
        let n = self.clusters();
        let ny = self.ny();
        (0..=n).all(|k| self.boundaries[k] + self.boundaries[n - k] == ny)
    }

    /// Compresses `p(x, y, s)` into `p(x, t, s)`.
    pub fn compress(&self, p: &JointHistogram) -> JointHistogram {
        let ns = p.ns();
        let mut mass = vec![0.0; 2 * self.clusters() * ns];
        for y in 0..p.ny() {
            let t = self.cluster_of(y);
            for s in 0..ns {
                let q = p.pair(y, s);
                mass[(t * ns + s) * 2] += q[0];
                mass[(t * ns + s) * 2 + 1] += q[1];
            }
        }
        let total: f64 = mass.iter().sum();
        mass.iter_mut().for_each(|m| *m /= total);
        JointHistogram::new(self.clusters(), ns, mass)
            .expect("compression preserves normalization")
            .with_values(
                (0..self.clusters()).map(|t| t as f64).collect(),
                p.s_values().to_vec(),
            )
    }
}

/// Output of the optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionResult {
    pub clustering: Clustering,
    /// Compressed `p(x, t, s)`.
    pub joint: JointHistogram,
    /// `I(X; T | S)` in bits.
    pub preserved: f64,
}

impl CompressionResult {
    fn from_clustering(p: &JointHistogram, clustering: Clustering) -> Self {
        let joint = clustering.compress(p);
        let preserved = conditional_mi(&joint);
        CompressionResult {
            clustering,
            joint,
            preserved,
        }
    }
}

/// Optimizer settings.
#[derive(Debug, Clone, Copy)]
pub struct IbOptions {
    pub inits: usize,
    pub seed: u64,
    /// Recompute cluster masses from scratch after every merge and compare.
    pub debug_check: bool,
}

impl Default for IbOptions {
    fn default() -> Self {
        IbOptions {
            inits: DEFAULT_INITS,
            seed: 0,
            debug_check: false,
        }
    }
}

/// Which neighbour of a boundary is pulled out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pull {
    /// Rightmost element of the cluster left of the boundary.
    FromLeft,
    /// Leftmost element of the cluster right of the boundary.
    FromRight,
}

/// Weighted KL term `sum_x a_x log2((a_x / |a|) / (m_x / |m|))`.
#[inline]
fn weighted_kl(a: [f64; 2], m: [f64; 2]) -> f64 {
    let na = a[0] + a[1];
    if na <= 0.0 {
        return 0.0;
    }
    let nm = m[0] + m[1];
    let mut acc = 0.0;
    for x in 0..2 {
        if a[x] > 0.0 {
            acc += a[x] * ((a[x] * nm) / (na * m[x])).log2();
        }
    }
    acc
}

/// Cost of merging mass `b` into cluster mass `a` under one side symbol,
/// weighted by the joint masses (i.e. already multiplied by `p(s)`).
#[inline]
fn joint_merge_cost(a: [f64; 2], b: [f64; 2]) -> f64 {
    let m = [a[0] + b[0], a[1] + b[1]];
    weighted_kl(a, m) + weighted_kl(b, m)
}

#[derive(Debug, Clone, Copy)]
struct Extraction {
    boundary: usize,
    pull: Pull,
    y: usize,
    mirror: usize,
}

/// Clustering state with incrementally maintained `p(x, t, s)`.
///
/// Besides the `n` regular clusters two temporary singleton slots exist
/// (indices `n` and `n + 1`) that hold an extracted element and its mirror.
#[derive(Debug, Clone)]
pub struct WorkingJoint<'a> {
    p: &'a JointHistogram,
    n: usize,
    boundaries: Vec<usize>,
    cluster_mass: Vec<[f64; 2]>,
    pending: Option<Extraction>,
}

impl<'a> WorkingJoint<'a> {
    pub fn new(p: &'a JointHistogram, clustering: &Clustering) -> Self {
        let n = clustering.clusters();
        let mut wj = WorkingJoint {
            p,
            n,
            boundaries: clustering.boundaries().to_vec(),
            cluster_mass: vec![[0.0; 2]; (n + 2) * p.ns()],
            pending: None,
        };
        wj.cluster_mass = wj.masses_from_scratch();
        wj
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn clustering(&self) -> Clustering {
        assert!(self.pending.is_none());
        Clustering {
            boundaries: self.boundaries.clone(),
        }
    }

    /// `p(x, t, s)` of cluster or slot `t`.
    pub fn cluster_pair(&self, t: usize, s: usize) -> [f64; 2] {
        self.cluster_mass[t * self.p.ns() + s]
    }

    fn element_cluster(&self, y: usize) -> usize {
        if let Some(ex) = self.pending {
            if y == ex.y {
                return self.n;
            }
            if y == ex.mirror {
                return self.n + 1;
            }
        }
        self.boundaries.partition_point(|&b| b <= y) - 1
    }

    /// Aggregation `sum_y p(t | y) p(x, y, s)` computed directly.
    pub fn masses_from_scratch(&self) -> Vec<[f64; 2]> {
        let ns = self.p.ns();
        let mut masses = vec![[0.0; 2]; (self.n + 2) * ns];
        for y in 0..self.p.ny() {
            let t = self.element_cluster(y);
            for s in 0..ns {
                let q = self.p.pair(y, s);
                let m = &mut masses[t * ns + s];
                m[0] += q[0];
                m[1] += q[1];
            }
        }
        masses
    }

    /// Largest deviation between maintained and recomputed masses.
    pub fn incremental_error(&self) -> f64 {
        self.masses_from_scratch()
            .iter()
            .zip(&self.cluster_mass)
            .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
            .fold(0.0, f64::max)
    }

    fn move_element(&mut self, y: usize, from: usize, to: usize) {
        let ns = self.p.ns();
        for s in 0..ns {
            let q = self.p.pair(y, s);
            let a = &mut self.cluster_mass[from * ns + s];
            a[0] -= q[0];
            a[1] -= q[1];
            let b = &mut self.cluster_mass[to * ns + s];
            b[0] += q[0];
            b[1] += q[1];
        }
    }

    /// Moves the element next to `boundary` and its mirror into the two
    /// singleton slots. Returns the extracted pair `(y, y')`.
    pub fn extract(&mut self, boundary: usize, pull: Pull) -> (usize, usize) {
        assert!(self.pending.is_none(), "extraction already pending");
        assert!(boundary >= 1 && boundary < self.n / 2);
        let y = match pull {
            Pull::FromLeft => self.boundaries[boundary] - 1,
            Pull::FromRight => self.boundaries[boundary],
        };
        let mirror = self.p.ny() - 1 - y;
        let from = self.element_cluster(y);
        let mfrom = self.element_cluster(mirror);
        self.move_element(y, from, self.n);
        self.move_element(mirror, mfrom, self.n + 1);
        self.pending = Some(Extraction {
            boundary,
            pull,
            y,
            mirror,
        });
        (y, mirror)
    }

    /// `(t_1, t_2)` for the pending extraction: the origin cluster of `y`
    /// first, the other neighbour of the boundary second.
    pub fn options(&self) -> (usize, usize) {
        let ex = self.pending.expect("no pending extraction");
        match ex.pull {
            Pull::FromLeft => (ex.boundary - 1, ex.boundary),
            Pull::FromRight => (ex.boundary, ex.boundary - 1),
        }
    }

    /// Mass of the origin cluster left after extraction, summed over x and s.
    fn origin_is_empty(&self) -> bool {
        let ex = self.pending.expect("no pending extraction");
        let (t1, _) = self.options();
        let lo = self.boundaries[t1];
        let hi = self.boundaries[t1 + 1];
        let size = hi - lo;
        size == 1 && (lo..hi).contains(&ex.y)
    }

    /// Individual merger cost `C(y, t | s)` of merging singleton slot
    /// `slot` (0 for `y`, 1 for `y'`) into cluster `t`, conditioned on `s`.
    pub fn merger_cost(&self, slot: usize, t: usize, s: usize) -> f64 {
        assert!(slot < 2);
        let ps: f64 = (0..self.n + 2)
            .map(|c| {
                let q = self.cluster_pair(c, s);
                q[0] + q[1]
            })
            .sum();
        if ps <= 0.0 {
            return 0.0;
        }
        joint_merge_cost(self.cluster_pair(t, s), self.cluster_pair(self.n + slot, s)) / ps
    }

    /// Symmetric merger cost `C_sym(y, k)` for option `k` in {1, 2}.
    pub fn merger_cost_sym(&self, k: usize) -> f64 {
        let (t1, t2) = self.options();
        let tk = if k == 1 { t1 } else { t2 };
        let tk_mirror = self.n - 1 - tk;
        (0..self.p.ns())
            .map(|s| {
                joint_merge_cost(self.cluster_pair(tk, s), self.cluster_pair(self.n, s))
                    + joint_merge_cost(
                        self.cluster_pair(tk_mirror, s),
                        self.cluster_pair(self.n + 1, s),
                    )
            })
            .sum()
    }

    /// Merges the singletons according to option `k` and updates boundaries.
    pub fn merge(&mut self, k: usize) {
        let ex = self.pending.expect("no pending extraction");
        let (t1, t2) = self.options();
        let tk = if k == 1 { t1 } else { t2 };
        self.move_element(ex.y, self.n, tk);
        self.move_element(ex.mirror, self.n + 1, self.n - 1 - tk);
        if k == 2 {
            let b = ex.boundary;
            let mb = self.n - b;
            match ex.pull {
                Pull::FromLeft => {
                    self.boundaries[b] -= 1;
                    self.boundaries[mb] += 1;
                }
                Pull::FromRight => {
                    self.boundaries[b] += 1;
                    self.boundaries[mb] -= 1;
                }
            }
        }
        self.pending = None;
    }

    /// `I(X; T | S)` of the current clustering (no extraction pending).
    pub fn preserved(&self) -> f64 {
        assert!(self.pending.is_none());
        let ns = self.p.ns();
        let mut total = 0.0;
        let mut pairs = vec![[0.0; 2]; self.n];
        for s in 0..ns {
            for (t, slot) in pairs.iter_mut().enumerate() {
                *slot = self.cluster_pair(t, s);
            }
            let ps: f64 = pairs.iter().map(|q| q[0] + q[1]).sum();
            if ps > 0.0 {
                total += ps * super::measures::mi_from_pairs(&pairs);
            }
        }
        total
    }
}

/// Outcome of one initialization: `None` when a cluster was emptied.
fn run_single(
    p: &JointHistogram,
    init: &Clustering,
    debug_check: bool,
    mut trace: Option<&mut Vec<f64>>,
) -> Option<Clustering> {
    let mut wj = WorkingJoint::new(p, init);
    let n = init.clusters();
    if let Some(tr) = trace.as_deref_mut() {
        tr.push(wj.preserved());
    }
    for _ in 0..MAX_SWEEPS {
        let old = wj.boundaries.clone();
        for b in 1..n / 2 {
            for pull in [Pull::FromLeft, Pull::FromRight] {
                loop {
                    wj.extract(b, pull);
                    let c1 = wj.merger_cost_sym(1);
                    let c2 = wj.merger_cost_sym(2);
                    let k = if c2 < c1 - COST_TIE_EPS { 2 } else { 1 };
                    if k == 2 && wj.origin_is_empty() {
                        return None;
                    }
                    wj.merge(k);
                    if debug_check {
                        let err = wj.incremental_error();
                        assert!(err <= 1e-12, "incremental p(x,t,s) drifted by {err}");
                    }
                    if k == 1 {
                        break;
                    }
                }
            }
        }
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(wj.preserved());
        }
        if wj.boundaries == old {
            break;
        }
    }
    Some(wj.clustering())
}

/// Random sign-symmetric clustering of `0..ny` into `n` clusters.
pub fn random_symmetric_clustering<R: Rng>(ny: usize, n: usize, rng: &mut R) -> Clustering {
    let free = n / 2 - 1;
    let candidates = ny / 2 - 1;
    let picks = rand::seq::index::sample(rng, candidates, free);
    let mut left: Vec<usize> = picks.iter().map(|i| i + 1).collect();
    left.sort_unstable();
    let mut boundaries = Vec::with_capacity(n + 1);
    boundaries.push(0);
    boundaries.extend(&left);
    boundaries.push(ny / 2);
    boundaries.extend(left.iter().rev().map(|&b| ny - b));
    boundaries.push(ny);
    Clustering { boundaries }
}

fn check_input(p: &JointHistogram, n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Validation(format!(
            "cluster count {n} must be even and >= 2"
        )));
    }
    if !p.ny().is_multiple_of(2) {
        return Err(Error::Validation(format!(
            "observation alphabet size {} must be even for symmetric thresholds",
            p.ny()
        )));
    }
    if p.ny() < n {
        return Err(Error::Validation(format!(
            "observation alphabet {} smaller than {n} clusters",
            p.ny()
        )));
    }
    if p.support_size() <= 1 {
        return Err(Error::Degenerate("all mass on a single observation".into()));
    }
    Ok(())
}

/// Runs one initialization and records `I(X; T | S)` after every sweep.
pub fn trace_single(p: &JointHistogram, init: &Clustering) -> (Option<Clustering>, Vec<f64>) {
    let mut trace = Vec::new();
    let out = run_single(p, init, true, Some(&mut trace));
    (out, trace)
}

/// Best symmetric threshold clustering of an LLR-sorted `p(x, y, s)` into
/// `n` clusters, maximizing `I(X; T | S)` over `opts.inits` random starts.
pub fn sequential_ib_side(
    p: &JointHistogram,
    n: usize,
    opts: &IbOptions,
) -> Result<CompressionResult> {
    check_input(p, n)?;
    let ny = p.ny();
    if ny == n {
        return Ok(CompressionResult::from_clustering(
            p,
            Clustering::identity(ny),
        ));
    }
    if n == 2 {
        return Ok(CompressionResult::from_clustering(
            p,
            Clustering {
                boundaries: vec![0, ny / 2, ny],
            },
        ));
    }
    let inits = opts.inits.max(1);
    // identical starts converge identically, so each distinct start runs once
    let starts: Vec<Clustering> = (0..inits)
        .map(|i| {
            let mut rng = substream(opts.seed, domain::IB_INIT, i as u64);
            random_symmetric_clustering(ny, n, &mut rng)
        })
        .collect();
    let mut first_index: HashMap<&Clustering, usize> = HashMap::new();
    for (i, c) in starts.iter().enumerate() {
        first_index.entry(c).or_insert(i);
    }
    let mut unique: Vec<(usize, &Clustering)> = first_index.iter().map(|(c, &i)| (i, *c)).collect();
    unique.sort_unstable_by_key(|&(i, _)| i);

    let outcomes: Vec<(usize, Option<CompressionResult>)> = unique
        .par_iter()
        .map(|&(i, start)| {
            let mut attempt = 0u64;
            let mut init = start.clone();
            loop {
                match run_single(p, &init, opts.debug_check, None) {
                    Some(c) => return (i, Some(CompressionResult::from_clustering(p, c))),
                    None if attempt < 16 => {
                        attempt += 1;
                        let mut rng =
                            substream(opts.seed, domain::IB_INIT, ((attempt) << 32) | i as u64);
                        init = random_symmetric_clustering(ny, n, &mut rng);
                    }
                    None => return (i, None),
                }
            }
        })
        .collect();

    outcomes
        .into_iter()
        .filter_map(|(i, r)| r.map(|r| (i, r)))
        .fold(
            None::<(usize, CompressionResult)>,
            |best, (i, r)| match best {
                Some((bi, br))
                    if br.preserved > r.preserved || (br.preserved == r.preserved && bi < i) =>
                {
                    Some((bi, br))
                }
                _ => Some((i, r)),
            },
        )
        .map(|(_, r)| r)
        .ok_or_else(|| Error::Degenerate("every initialization emptied a cluster".into()))
}

/// Limit on the number of enumerated threshold placements.
pub const EXHAUSTIVE_LIMIT: u128 = 20_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Exhaustive search over all symmetric threshold placements.
pub fn exhaustive_oracle(p: &JointHistogram, n: usize) -> Result<CompressionResult> {
    check_input(p, n)?;
    let ny = p.ny();
    if ny == n {
        return Ok(CompressionResult::from_clustering(
            p,
            Clustering::identity(ny),
        ));
    }
    let free = n / 2 - 1;
    let candidates = ny / 2 - 1;
    let count = binomial(candidates, free);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            count,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let build = |left: &[usize]| {
        let mut b = vec![0];
        b.extend_from_slice(left);
        b.push(ny / 2);
        b.extend(left.iter().rev().map(|&v| ny - v));
        b.push(ny);
        Clustering { boundaries: b }
    };
    // lexicographic enumeration of `free`-subsets of 1..=candidates
    let mut left: Vec<usize> = (1..=free).collect();
    let mut best = CompressionResult::from_clustering(p, build(&left));
    loop {
        let mut i = free;
        while i > 0 && left[i - 1] == candidates - (free - i) {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        left[i - 1] += 1;
        for j in i..free {
            left[j] = left[j - 1] + 1;
        }
        let r = CompressionResult::from_clustering(p, build(&left));
        if r.preserved > best.preserved {
            best = r;
        }
    }
    Ok(best)
}

/// Reorders `y` so that `log p(x=0, y) / p(x=1, y)` is nondecreasing.
///
/// Returns the sorted histogram and `perm` with `perm[new] = old`. Ties
/// keep their original order.
pub fn sort_by_llr(p: &JointHistogram) -> (JointHistogram, Vec<usize>) {
    let keys: Vec<f64> = p.xy_marginal().iter().map(|q| pair_llr(*q)).collect();
    let mut perm: Vec<usize> = (0..p.ny()).collect();
    perm.sort_by(|&a, &b| keys[a].partial_cmp(&keys[b]).expect("LLR keys are not NaN"));
    let sorted = p.select_y(&perm).expect("permutation keeps mass");
    (sorted, perm)
}

/// `ln p0 - ln p1`, exactly antisymmetric under swapping; 0 for no mass.
pub fn pair_llr(q: [f64; 2]) -> f64 {
    match (q[0] > 0.0, q[1] > 0.0) {
        (false, false) => 0.0,
        (true, false) => f64::INFINITY,
        (false, true) => f64::NEG_INFINITY,
        (true, true) => q[0].ln() - q[1].ln(),
    }
}
