//! Dense symmetric eigenvalues, empirical spectral distributions, reference
//! laws and distances between them.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Dense symmetric matrix, full row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Wraps row-major data, rejecting asymmetry beyond `1e-12` relative to
    /// the largest entry.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(invalid(format!("expected {} entries, got {}", n * n, data.len())));
        }
        let m = Self { n, data };
        m.check_symmetric()?;
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.set(i, j, v);
        self.set(j, i, v);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.data.iter_mut().for_each(|x| *x *= factor);
        self
    }

    /// `M + shift * I`.
    pub fn shifted(mut self, shift: f64) -> Self {
        for i in 0..self.n {
            self.data[i * self.n + i] += shift;
        }
        self
    }

    /// `M + c * J` where `J` is the all-ones matrix.
    pub fn plus_constant(mut self, c: f64) -> Self {
        self.data.iter_mut().for_each(|x| *x += c);
        self
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.n).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    fn check_symmetric(&self) -> Result<()> {
        let scale = self.data.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..self.n {
            for j in i + 1..self.n {
                if (self.get(i, j) - self.get(j, i)).abs() > 1e-12 * scale {
                    return Err(invalid(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(())
    }
}

/// All eigenvalues of a symmetric matrix, ascending.
///
/// Householder reduction to tridiagonal form on packed lower-triangular
/// storage, followed by implicit QL with Wilkinson-type shifts.
pub fn eigenvalues_symmetric(m: &SymMatrix) -> Result<Vec<f64>> {
    m.check_symmetric()?;
    let n = m.n;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut packed = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        packed.extend_from_slice(&m.data[i * n..i * n + i + 1]);
    }
    let (mut diag, mut off) = tridiagonalize(n, &mut packed);
    tridiagonal_eigenvalues(&mut diag, &mut off)?;
    diag.sort_by(f64::total_cmp);
    Ok(diag)
}

#[inline]
fn row_offset(i: usize) -> usize {
    i * (i + 1) / 2
}

/// Reduces the packed lower triangle in place; returns the diagonal and the
/// sub-diagonal (`off[i]` couples `i` and `i + 1`, `off[n - 1] = 0`).
///
/// Rows are eliminated from the bottom up so the Householder vector of each
/// step is a contiguous row prefix. The rank-2 update of one step is fused
/// with the matrix-vector product of the next, halving passes over memory.
fn tridiagonalize(n: usize, a: &mut [f64]) -> (Vec<f64>, Vec<f64>) {
    let mut diag = vec![0.0; n];
    let mut coupling = vec![0.0; n]; // coupling[i] links i - 1 and i
    let mut pending: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut p = vec![0.0; n];

    for i in (1..n).rev() {
        let row = &mut a[row_offset(i)..row_offset(i) + i + 1];
        if let Some((v, w)) = &pending {
            let (vi, wi) = (v[i], w[i]);
            for l in 0..=i {
                row[l] -= vi * w[l] + wi * v[l];
            }
        }
        diag[i] = row[i];
        let x = &row[..i];
        let head_norm2: f64 = x[..i - 1].iter().map(|t| t * t).sum();

        let next = if head_norm2 == 0.0 {
            coupling[i] = x[i - 1];
            None
        } else {
            let last = x[i - 1];
            let norm = (head_norm2 + last * last).sqrt();
            let alpha = if last > 0.0 { -norm } else { norm };
            coupling[i] = alpha;
            let mut v = x.to_vec();
            v[i - 1] -= alpha;
            let vnorm2 = head_norm2 + v[i - 1] * v[i - 1];
            Some((v, 2.0 / vnorm2))
        };

        // fused pass over rows 0..i: finish the previous update, accumulate B v
        p[..i].iter_mut().for_each(|t| *t = 0.0);
        for j in 0..i {
            let rj = &mut a[row_offset(j)..row_offset(j) + j + 1];
            let v_next = next.as_ref().map(|(v, _)| &v[..]);
            let acc = match (&pending, v_next) {
                (Some((pv, pw)), Some(v)) => update_and_symv_row(rj, &pv[..=j], &pw[..=j], v, &mut p[..=j]),
                (Some((pv, pw)), None) => {
                    let (vj, wj) = (pv[j], pw[j]);
                    for ((r, &a), &b) in rj.iter_mut().zip(&pw[..=j]).zip(&pv[..=j]) {
                        *r -= vj * a + wj * b;
                    }
                    0.0
                }
                (None, Some(v)) => symv_row(rj, v, &mut p[..=j]),
                (None, None) => 0.0,
            };
            p[j] += acc;
        }

        pending = next.map(|(v, beta)| {
            let mut w: Vec<f64> = p[..i].iter().map(|t| beta * t).collect();
            let k = 0.5 * beta * w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
            w.iter_mut().zip(&v).for_each(|(wl, vl)| *wl -= k * vl);
            (v, w)
        });
    }
    if let Some((v, w)) = &pending {
        a[0] -= 2.0 * v[0] * w[0];
    }
    diag[0] = a[0];

    let mut off = vec![0.0; n];
    off[..n - 1].copy_from_slice(&coupling[1..]);
    (diag, off)
}

/// Row `j` of the packed block (`row.len() == j + 1`): accumulates the
/// lower-triangle contribution of this row to `p = B v`. Entries `l < j` feed
/// `p[l]`; the returned dot product belongs to `p[j]`.
#[inline]
fn symv_row(row: &[f64], v: &[f64], p: &mut [f64]) -> f64 {
    let j = row.len() - 1;
    let vj = v[j];
    let (head, diag) = row.split_at(j);
    let (vh, ph) = (&v[..j], &mut p[..j]);
    let mut acc = [0.0f64; 4];
    let chunks = j / 4 * 4;
    for ((r, x), y) in head[..chunks].chunks_exact(4).zip(vh[..chunks].chunks_exact(4)).zip(ph[..chunks].chunks_exact_mut(4)) {
        for k in 0..4 {
            acc[k] += r[k] * x[k];
            y[k] += r[k] * vj;
        }
    }
    let mut tail = 0.0;
    for l in chunks..j {
        tail += head[l] * vh[l];
        ph[l] += head[l] * vj;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail + diag[0] * vj
}

/// Applies the rank-2 update `row -= v_j w + w_j v` and then accumulates the
/// updated row into `p = B v_next` as in [`symv_row`], in one sweep.
#[inline]
fn update_and_symv_row(row: &mut [f64], pv: &[f64], pw: &[f64], v: &[f64], p: &mut [f64]) -> f64 {
    let j = row.len() - 1;
    let (vj_old, wj_old) = (pv[j], pw[j]);
    let vj = v[j];
    let chunks = j / 4 * 4;
    let mut acc = [0.0f64; 4];
    {
        let (head, _) = row.split_at_mut(j);
        let it = head[..chunks]
            .chunks_exact_mut(4)
            .zip(pv[..chunks].chunks_exact(4))
            .zip(pw[..chunks].chunks_exact(4))
            .zip(v[..chunks].chunks_exact(4))
            .zip(p[..chunks].chunks_exact_mut(4));
        for ((((r, a), b), x), y) in it {
            for k in 0..4 {
                let t = r[k] - (vj_old * b[k] + wj_old * a[k]);
                r[k] = t;
                acc[k] += t * x[k];
                y[k] += t * vj;
            }
        }
    }
    let mut tail = 0.0;
    for l in chunks..j {
        let t = row[l] - (vj_old * pw[l] + wj_old * pv[l]);
        row[l] = t;
        tail += t * v[l];
        p[l] += t * vj;
    }
    row[j] -= 2.0 * vj_old * wj_old;
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail + row[j] * vj
}

/// Eigenvalues of the symmetric tridiagonal matrix (`d`, `e`) by implicit QL;
/// `e[i]` couples `i` and `i + 1`. Results overwrite `d` (unsorted).
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    // absolute floor so blocks of (near-)zero diagonal still deflate
    let floor = f64::EPSILON * d.iter().zip(e.iter()).map(|(a, b)| a.abs() + b.abs()).fold(0.0, f64::max);
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 100 {
                return Err(Error::Domain("tridiagonal QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Histogram of `eigs / scale` on `[lo, hi]` with out-of-range mass kept apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        let w = self.width();
        (0..=self.bins()).map(|k| self.lo + k as f64 * w).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.below + self.above
    }

    /// Probability density per bin (normalized by the total count, including
    /// out-of-range mass).
    pub fn density(&self) -> Vec<f64> {
        let norm = self.total() as f64 * self.width();
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }
}

/// Default binning for normalized spectra.
pub const DEFAULT_BINS: usize = 61;
pub const DEFAULT_RANGE: (f64, f64) = (-3.0, 3.0);

pub fn esd_histogram(eigs: &[f64], scale: f64, bins: usize, range: (f64, f64)) -> Result<Histogram> {
    let (lo, hi) = range;
    if bins == 0 || !(lo < hi) || !(scale > 0.0) {
        return Err(invalid("need bins >= 1, lo < hi and scale > 0"));
    }
    let width = (hi - lo) / bins as f64;
    let mut h = Histogram { lo, hi, counts: vec![0; bins], below: 0, above: 0 };
    for &ev in eigs {
        let x = ev / scale;
        if x < lo {
            h.below += 1;
        } else if x > hi {
            h.above += 1;
        } else {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            h.counts[k] += 1;
        }
    }
    Ok(h)
}

/// Semicircle density `sqrt(4 - x^2) / (2 pi)` on `[-2, 2]`.
pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * std::f64::consts::PI)
    }
}

pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        let pi = std::f64::consts::PI;
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * pi) + (x / 2.0).asin() / pi
    }
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `eigs / scale` and `reference_cdf`, using both one-sided suprema of the
/// right-continuous empirical CDF at the sorted sample points.
pub fn ks_distance(eigs: &[f64], scale: f64, reference_cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if eigs.is_empty() {
        return Err(invalid("ks_distance needs at least one eigenvalue"));
    }
    let mut xs: Vec<f64> = eigs.iter().map(|x| x / scale).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let f = reference_cdf(x);
        acc.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    });
    Ok(d)
}

/// Sup-norm distance between two empirical CDFs.
pub fn ecdf_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best = 0.0f64;
    while i < xa.len() || j < xb.len() {
        let x = match (xa.get(i), xb.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

/// `(1/n) sum (lambda_i / scale)^k`.
pub fn moment_of(eigs: &[f64], k: u32, scale: f64) -> f64 {
    let terms: Vec<f64> = eigs.iter().map(|x| (x / scale).powi(k as i32)).collect();
    crate::rng::pairwise_sum(&terms) / eigs.len() as f64
}

/// `max(|lambda_2|, |lambda_n|)` with eigenvalues ordered descending.
pub fn second_eigenvalue(eigs: &[f64]) -> Result<f64> {
    if eigs.len() < 2 {
        return Err(invalid("second_eigenvalue needs at least two eigenvalues"));
    }
    let mut desc = eigs.to_vec();
    desc.sort_by(|a, b| b.total_cmp(a));
    Ok(desc[1].abs().max(desc[desc.len() - 1].abs()))
}

/// Eigenvalues plus derived statistics on a chosen scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// Unscaled eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub scale: f64,
    pub esd: Histogram,
    /// `k -> (1/n) sum (lambda_i / scale)^k`.
    pub moments: BTreeMap<u32, f64>,
    /// `max(|lambda_2|, |lambda_n|)`, unscaled.
    pub lambda_second: f64,
}

impl SpectralSummary {
    pub fn from_eigenvalues(
        mut eigenvalues: Vec<f64>,
        scale: f64,
        bins: usize,
        range: (f64, f64),
        k_max: u32,
    ) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(invalid("empty spectrum"));
        }
        eigenvalues.sort_by(f64::total_cmp);
        let esd = esd_histogram(&eigenvalues, scale, bins, range)?;
        let moments = (1..=k_max).map(|k| (k, moment_of(&eigenvalues, k, scale))).collect();
        let lambda_second = if eigenvalues.len() >= 2 { second_eigenvalue(&eigenvalues)? } else { 0.0 };
        Ok(Self { eigenvalues, scale, esd, moments, lambda_second })
    }

    pub fn of_matrix(m: &SymMatrix, scale: f64, k_max: u32) -> Result<Self> {
        let eigs = eigenvalues_symmetric(m)?;
        Self::from_eigenvalues(eigs, scale, DEFAULT_BINS, DEFAULT_RANGE, k_max)
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }
}

pub fn empirical_moment(summary: &SpectralSummary, k: u32, scale: f64) -> Result<f64> {
    if k == 0 {
        return Err(invalid("moment order must be >= 1"));
    }
    Ok(moment_of(&summary.eigenvalues, k, scale))
}

/// `eigenvalues.csv`: `index,value`.
pub fn write_eigenvalues_csv(eigs: &[f64], mut w: impl Write) -> Result<()> {
    writeln!(w, "index,value")?;
    for (i, x) in eigs.iter().enumerate() {
        writeln!(w, "{i},{x:e}")?;
    }
    Ok(())
}

/// `esd.csv`: `bin_lo,bin_hi,count,density`.
pub fn write_esd_csv(h: &Histogram, mut w: impl Write) -> Result<()> {
    writeln!(w, "bin_lo,bin_hi,count,density")?;
    let edges = h.edges();
    for (k, (c, dens)) in h.counts.iter().zip(h.density()).enumerate() {
        writeln!(w, "{},{},{c},{dens:e}", edges[k], edges[k + 1])?;
    }
    Ok(())
}
