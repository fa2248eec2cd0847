//! Closed walks and the moment method: Catalan and `nu_alpha` moments, the
//! multiplicity reduction, walk classification, exhaustive enumeration with
//! the counting bound, and a Monte Carlo trace oracle for tiny instances.
//!
//! A walk `(i_1, ..., i_k)` has consecutive entries distinct and `i_k != i_1`;
//! it is closed by the implicit step `i_k -> i_1`, so `k` is the number of
//! edges traversed. Labels are arbitrary `usize`; enumeration yields `0..n`.

use std::collections::BTreeMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{Edge, SimpleGraph};
use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, mean_se, monte_carlo, rng_from_seed, Estimate, Rng};
use crate::spectral::{eigenvalues_symmetric, moment_of, SymMatrix};
use crate::sphere::{calibrate_tau, frame_vector, sample_gram_frame, CapParams, UnitVectorSet};

/// Largest `m` with `catalan(m)` computed; `C_30` is about `3.8e15`.
pub const CATALAN_MAX: u32 = 30;

/// Enumeration guard on `n (n-1)^(k-1)`.
pub const ENUMERATION_LIMIT: u128 = 100_000_000;

pub fn catalan(m: u32) -> Result<u64> {
    if m > CATALAN_MAX {
        return Err(Error::SizeGuard { size: m as u128, limit: CATALAN_MAX as u128 });
    }
    // C_{j+1} = C_j * 2(2j+1) / (j+2), exact at every step
    let mut c: u128 = 1;
    for j in 0..m as u128 {
        c = c * 2 * (2 * j + 1) / (j + 2);
    }
    Ok(c as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum MomentRegime {
    Semicircle,
    NuAlpha { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentValue {
    pub k: u32,
    pub value: f64,
    pub regime: MomentRegime,
}

pub fn semicircle_moment(k: u32) -> Result<MomentValue> {
    let value = if k % 2 == 1 { 0.0 } else { catalan(k / 2)? as f64 };
    Ok(MomentValue { k, value, regime: MomentRegime::Semicircle })
}

/// Moments of `nu_alpha`: zero for odd `k`, and for `k = 2m`
/// `sum_{l=1}^{m} C_l alpha^(l-m)`.
pub fn nu_alpha_moment(k: u32, alpha: f64) -> Result<MomentValue> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    let regime = MomentRegime::NuAlpha { alpha };
    let value = match k {
        0 => 1.0,
        _ if k % 2 == 1 => 0.0,
        _ => {
            let m = (k / 2) as i32;
            let mut sum = 0.0;
            for l in 1..=m {
                sum += catalan(l as u32)? as f64 * alpha.powi(l - m);
            }
            sum
        }
    };
    Ok(MomentValue { k, value, regime })
}

/// `counts[l]` is the number of closed walks of length `2m` from vertex 0
/// whose vertices are labelled in order of first visit and whose edge set is
/// a tree with `l` edges.
pub fn tree_walk_counts(m: usize) -> Result<Vec<u64>> {
    if m > 10 {
        return Err(invalid(format!("tree walk enumeration limited to m <= 10, got {m}")));
    }
    fn go(cur: usize, left: usize, depth: &mut Vec<usize>, adj: &mut Vec<Vec<usize>>, counts: &mut [u64]) {
        if left == 0 {
            if cur == 0 {
                counts[depth.len() - 1] += 1;
            }
            return;
        }
        if depth[cur] > left {
            return;
        }
        for i in 0..adj[cur].len() {
            let next = adj[cur][i];
            go(next, left - 1, depth, adj, counts);
        }
        // step to a fresh vertex
        let fresh = depth.len();
        depth.push(depth[cur] + 1);
        adj.push(vec![cur]);
        adj[cur].push(fresh);
        go(fresh, left - 1, depth, adj, counts);
        adj[cur].pop();
        adj.pop();
        depth.pop();
    }
    let mut counts = vec![0u64; m + 1];
    go(0, 2 * m, &mut vec![0], &mut vec![Vec::new()], &mut counts);
    Ok(counts)
}

/// Limit of `E (1/n) tr (A / sqrt(alpha))^k` for `G(n, alpha / n)`: only
/// tree walks survive, each with `l` edges contributing `alpha^(l - k/2)`.
///
/// Agrees with [`nu_alpha_moment`] for `k <= 4`; from `k = 6` on the tree
/// walk counts exceed the Catalan numbers (at `k = 6` the `alpha^-1`
/// coefficient is 6, not 2).
pub fn sparse_tree_limit(k: u32, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if k % 2 == 1 {
        return Ok(0.0);
    }
    let m = (k / 2) as usize;
    let counts = tree_walk_counts(m)?;
    Ok((1..=m).map(|l| counts[l] as f64 * alpha.powi(l as i32 - m as i32)).sum())
}

/// `(alpha_k, beta_k)` with `(a - p)^k = alpha_k (a - p) + beta_k` for `a` in {0, 1}.
pub fn multiplicity_reduce(k: u32, p: f64) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(invalid("multiplicity must be >= 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("p must lie in (0, 1), got {p}")));
    }
    let k = k as i32;
    let q = 1.0 - p;
    let (up, down) = (q.powi(k), (-p).powi(k));
    Ok((up - down, p * up + q * down))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WalkClass {
    #[serde(rename = "C1_dense")]
    C1Dense,
    #[serde(rename = "C2_dense")]
    C2Dense,
    #[serde(rename = "C1_sparse")]
    C1Sparse,
    #[serde(rename = "C2_sparse")]
    C2Sparse,
}

impl WalkClass {
    pub fn is_c1(self) -> bool {
        matches!(self, WalkClass::C1Dense | WalkClass::C1Sparse)
    }
}

/// Vertex count and edge multiplicities of a valid closed walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkShape {
    pub v: usize,
    pub multiplicities: BTreeMap<Edge, usize>,
}

impl WalkShape {
    pub fn of(walk: &[usize]) -> Result<Self> {
        let k = walk.len();
        if k < 2 {
            return Err(Error::InvalidWalk(format!("walk needs at least two vertices, got {k}")));
        }
        let mut multiplicities = BTreeMap::new();
        for i in 0..k {
            let (a, b) = (walk[i], walk[(i + 1) % k]);
            if a == b {
                return Err(Error::InvalidWalk(format!(
                    "repeated consecutive vertex {a} at position {}",
                    (i + 1) % k
                )));
            }
            *multiplicities.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
        let mut labels = walk.to_vec();
        labels.sort_unstable();
        labels.dedup();
        Ok(Self { v: labels.len(), multiplicities })
    }

    pub fn e(&self) -> usize {
        self.multiplicities.len()
    }

    /// Edges traversed exactly once.
    pub fn b(&self) -> usize {
        self.multiplicities.values().filter(|&&m| m == 1).count()
    }

    /// Excess `e - v + 1` (walk graphs are connected).
    pub fn g(&self) -> usize {
        self.e() + 1 - self.v
    }

    pub fn is_tree(&self) -> bool {
        self.g() == 0
    }
}

pub fn classify_walk(walk: &[usize], regime: Regime) -> Result<WalkClass> {
    let shape = WalkShape::of(walk)?;
    Ok(classify_shape(&shape, regime))
}

fn classify_shape(shape: &WalkShape, regime: Regime) -> WalkClass {
    match regime {
        Regime::Dense if shape.is_tree() && shape.multiplicities.values().all(|&m| m == 2) => WalkClass::C1Dense,
        Regime::Dense => WalkClass::C2Dense,
        Regime::Sparse if shape.is_tree() => WalkClass::C1Sparse,
        Regime::Sparse => WalkClass::C2Sparse,
    }
}

/// `n (n-1)^(k-1)`, saturating.
pub fn walk_space_size(n: usize, k: usize) -> u128 {
    if k == 0 {
        return 0;
    }
    let mut size = n as u128;
    for _ in 1..k {
        size = size.saturating_mul(n.saturating_sub(1) as u128);
    }
    size
}

/// Lexicographic stream of all closed walks of length `k` on `0..n`.
#[derive(Debug, Clone)]
pub struct ClosedWalks {
    n: usize,
    seq: Vec<usize>,
    started: bool,
    done: bool,
}

impl ClosedWalks {
    fn admissible(&self, t: usize, v: usize) -> bool {
        let k = self.seq.len();
        (t == 0 || v != self.seq[t - 1]) && (t + 1 != k || v != self.seq[0])
    }
}

impl Iterator for ClosedWalks {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let k = self.seq.len();
        let (mut t, mut start) = if self.started { (k - 1, self.seq[k - 1] + 1) } else { (0, 0) };
        self.started = true;
        loop {
            let mut v = start;
            while v < self.n && !self.admissible(t, v) {
                v += 1;
            }
            if v < self.n {
                self.seq[t] = v;
                if t + 1 == k {
                    return Some(self.seq.clone());
                }
                t += 1;
                start = 0;
            } else {
                if t == 0 {
                    self.done = true;
                    return None;
                }
                t -= 1;
                start = self.seq[t] + 1;
            }
        }
    }
}

pub fn enumerate_closed_walks(n: usize, k: usize) -> Result<ClosedWalks> {
    if n < 2 || k < 2 {
        return Err(invalid(format!("closed walks need n >= 2 and k >= 2, got n={n}, k={k}")));
    }
    let size = walk_space_size(n, k);
    if size > ENUMERATION_LIMIT {
        return Err(Error::SizeGuard { size, limit: ENUMERATION_LIMIT });
    }
    Ok(ClosedWalks { n, seq: vec![0; k], started: false, done: false })
}

/// `n^(e+1-g) k^(2(k-b+g))`.
pub fn counting_bound(n: usize, k: usize, e: usize, b: usize, g: usize) -> f64 {
    let n_exp = e as i32 + 1 - g as i32;
    let k_exp = 2 * (k as i32 - b as i32 + g as i32);
    (n as f64).powi(n_exp) * (k as f64).powi(k_exp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsBucket {
    pub e: usize,
    pub b: usize,
    pub g: usize,
    pub count: u64,
    pub bound: f64,
    pub within_bound: bool,
}

/// Exact histogram of closed walks of length `k` on `n` labels by `(e, b, g)`.
pub fn count_walks_by_stats(n: usize, k: usize) -> Result<BTreeMap<(usize, usize, usize), u64>> {
    let mut counts = BTreeMap::new();
    for walk in enumerate_closed_walks(n, k)? {
        let shape = WalkShape::of(&walk)?;
        *counts.entry((shape.e(), shape.b(), shape.g())).or_insert(0) += 1;
    }
    Ok(counts)
}

pub fn check_counting_bound(n: usize, k: usize) -> Result<Vec<StatsBucket>> {
    Ok(count_walks_by_stats(n, k)?
        .into_iter()
        .map(|((e, b, g), count)| {
            let bound = counting_bound(n, k, e, b, g);
            StatsBucket { e, b, g, count, bound, within_bound: count as f64 <= bound }
        })
        .collect())
}

/// All Dyck words of semilength `m` (`true` = step away from the root).
pub fn dyck_words(m: usize) -> Vec<Vec<bool>> {
    fn extend(word: &mut Vec<bool>, ups: usize, downs: usize, m: usize, out: &mut Vec<Vec<bool>>) {
        if word.len() == 2 * m {
            out.push(word.clone());
            return;
        }
        if ups < m {
            word.push(true);
            extend(word, ups + 1, downs, m, out);
            word.pop();
        }
        if downs < ups {
            word.push(false);
            extend(word, ups, downs + 1, m, out);
            word.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(2 * m), 0, 0, m, &mut out);
    out
}

/// Number of closed walks of length `2m` on `n` labels that traverse a tree
/// with every edge exactly twice: rooted plane trees with `m` edges (one per
/// Dyck word, enumerated) times the `n (n-1) ... (n-m)` injective labelings.
pub fn tree_walk_count(n: usize, m: usize) -> u128 {
    let shapes = dyck_words(m).len() as u128;
    (0..=m).fold(shapes, |acc, j| acc * n.saturating_sub(j) as u128)
}

/// Exact finite-`n` value of the tree part of the normalized trace for walks
/// of length `k`: `tree_walk_count(n, k/2) / n^(k/2+1)`, zero for odd `k`.
pub fn tree_walk_prediction(n: usize, k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let m = k / 2;
    tree_walk_count(n, m) as f64 / (n as f64).powi(m as i32 + 1)
}

/// Uniform vectors whose Gram matrix has the law of `n` i.i.d. uniform
/// vectors on `S^{d-1}`.
fn latent_vectors(n: usize, d: usize, rng: &mut Rng) -> Result<UnitVectorSet> {
    if n <= d {
        return sample_gram_frame(n, d, rng);
    }
    crate::sphere::sample_unit_vectors(n, d, rng.random())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleParameters {
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub k: usize,
    pub tau: f64,
    pub seed: u64,
    pub walks: u64,
    pub c1_walks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleErrors {
    #[serde(rename = "S1")]
    pub s1: f64,
    #[serde(rename = "S2")]
    pub s2: f64,
    pub total: f64,
    pub spectral: f64,
    /// SE of the per-trial difference between walk sum and spectral trace.
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub parameters: OracleParameters,
    #[serde(rename = "S1_hat")]
    pub s1_hat: f64,
    #[serde(rename = "S2_hat")]
    pub s2_hat: f64,
    pub total_hat: f64,
    pub spectral_total: f64,
    pub standard_errors: OracleErrors,
    pub trials: usize,
    /// Exact finite-`n` value of `E S1`.
    #[serde(rename = "S1_exact")]
    pub s1_exact: f64,
}

/// Monte Carlo evaluation of the trace expansion of
/// `(1/n) E tr (Q / sqrt(n p (1-p)))^k` with `Q = A - p (J - I)`.
///
/// Each trial draws fresh latent vectors (seed `derive_seed(seed, trial)`),
/// sums `Q_{i1 i2} ... Q_{ik i1}` over every closed walk split into dense C1
/// and C2 walks, and computes the same quantity from the spectrum of `Q`.
/// `p` is the calibrated cap measure, so the centering is exact.
pub fn brute_trace_oracle(n: usize, d: usize, p: f64, k: usize, trials: usize, seed: u64) -> Result<OracleReport> {
    if trials == 0 {
        return Err(invalid("trials must be >= 1"));
    }
    let cap = calibrate_tau(p, d, 1e-12)?;
    let walks: Vec<Vec<usize>> = enumerate_closed_walks(n, k)?.collect();
    let mut c1 = Vec::new();
    let mut c2 = Vec::new();
    for w in walks {
        match classify_walk(&w, Regime::Dense)? {
            WalkClass::C1Dense => c1.extend(w),
            _ => c2.extend(w),
        }
    }
    let (c1_walks, c2_walks) = ((c1.len() / k) as u64, (c2.len() / k) as u64);
    let pq = cap.p * (1.0 - cap.p);
    let norm = (n as f64).powf(k as f64 / 2.0 + 1.0) * pq.powf(k as f64 / 2.0);
    let scale = (n as f64 * pq).sqrt();

    let walk_sum = |q: &[f64], flat: &[usize]| -> f64 {
        let partial: Vec<f64> = flat
            .chunks_exact(k)
            .map(|w| {
                let mut prod = q[w[k - 1] * n + w[0]];
                for s in w.windows(2) {
                    prod *= q[s[0] * n + s[1]];
                }
                prod
            })
            .collect();
        crate::rng::pairwise_sum(&partial)
    };

    let per_trial: Vec<Result<[f64; 3]>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(seed, t as u64));
            let q = centered_matrix(&latent_vectors(n, d, &mut rng)?, &cap);
            let s1 = walk_sum(&q, &c1) / norm;
            let s2 = walk_sum(&q, &c2) / norm;
            let eigs = eigenvalues_symmetric(&SymMatrix::from_row_major(n, q)?)?;
            Ok([s1, s2, moment_of(&eigs, k as u32, scale)])
        })
        .collect();
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;

    let column = |f: &dyn Fn(&[f64; 3]) -> f64| per_trial.iter().map(f).collect::<Vec<f64>>();
    let (s1_hat, s1_se) = mean_se(&column(&|r| r[0]));
    let (s2_hat, s2_se) = mean_se(&column(&|r| r[1]));
    let (total_hat, total_se) = mean_se(&column(&|r| r[0] + r[1]));
    let (spectral_total, spectral_se) = mean_se(&column(&|r| r[2]));
    let (_, diff_se) = mean_se(&column(&|r| r[0] + r[1] - r[2]));
    Ok(OracleReport {
        parameters: OracleParameters {
            n,
            d,
            p: cap.p,
            k,
            tau: cap.tau,
            seed,
            walks: c1_walks + c2_walks,
            c1_walks,
        },
        s1_hat,
        s2_hat,
        total_hat,
        spectral_total,
        standard_errors: OracleErrors {
            s1: s1_se,
            s2: s2_se,
            total: total_se,
            spectral: spectral_se,
            difference: diff_se,
        },
        trials,
        s1_exact: tree_walk_prediction(n, k),
    })
}

/// Row-major `A - p (J - I)` for the geometric graph on `vectors`.
fn centered_matrix(vectors: &UnitVectorSet, cap: &CapParams) -> Vec<f64> {
    let n = vectors.n();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let a = if vectors.inner(i, j) >= cap.tau { 1.0 } else { 0.0 };
            q[i * n + j] = a - cap.p;
            q[j * n + i] = a - cap.p;
        }
    }
    q
}

/// Monte Carlo estimate of `E prod_e Q_e^2` over the edges of a tree, where
/// `Q_e = A_e - p` for the geometric graph; the exact value is `(p(1-p))^|E|`.
pub fn tree_moment_check(tree: &SimpleGraph, d: usize, p: f64, trials: u64, seed: u64) -> Result<Estimate> {
    let v = tree.n();
    if v < 2 || !tree.is_connected() || tree.edge_count() != v - 1 {
        return Err(invalid("tree_moment_check needs a tree with at least one edge"));
    }
    if v > d {
        return Err(invalid(format!("tree has {v} vertices, more than d={d}")));
    }
    if trials == 0 {
        return Err(invalid("trials must be >= 1"));
    }
    let cap = calibrate_tau(p, d, 1e-12)?;
    let edges = tree.edges().to_vec();
    let stats = monte_carlo(
        trials,
        seed,
        || vec![0.0; v * v],
        |rng, frame| {
            for (i, row) in frame.chunks_exact_mut(v).enumerate() {
                frame_vector(i, d, rng, row);
            }
            edges
                .iter()
                .map(|&(a, b)| {
                    let inner: f64 = frame[a * v..(a + 1) * v].iter().zip(&frame[b * v..(b + 1) * v]).map(|(x, y)| x * y).sum();
                    let q = if inner >= cap.tau { 1.0 - cap.p } else { -cap.p };
                    q * q
                })
                .product()
        },
    );
    Ok(stats.estimate())
}
