//! Uniform vectors on the unit sphere S^{d-1}, the spherical-cap measure and
//! its inverse (threshold calibration), and sampling from measure-p caps.
//!
//! The inner product `t = <u, v>` of two independent uniform unit vectors has
//! density proportional to `(1 - t^2)^{(d-3)/2}` on `[-1, 1]`. Writing
//! `t = cos(theta)` turns this into `sin(theta)^{d-2}` on `[0, pi]`, which is
//! smooth at the endpoints for every `d >= 2`, so all cap integrals here are
//! taken in the angle variable.

use std::sync::OnceLock;

use rand::Rng as _;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, rng_from_seed, Rng};

const NORM_TOL: f64 = 1e-10;

/// `n` unit vectors in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVectorSet {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl UnitVectorSet {
    /// Wraps row-major data, checking shape and that every row has unit norm.
    pub fn from_rows(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d < 2 {
            return Err(invalid(format!("need n >= 1 and d >= 2, got n={n}, d={d}")));
        }
        if data.len() != n * d {
            return Err(invalid(format!("expected {} entries, got {}", n * d, data.len())));
        }
        for (i, row) in data.chunks_exact(d).enumerate() {
            let norm = dot(row, row).sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(invalid(format!("row {i} has norm {norm}")));
            }
        }
        Ok(Self { n, d, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn inner(&self, i: usize, j: usize) -> f64 {
        dot(self.row(i), self.row(j))
    }

    /// Applies `R` (d x d, row-major) to every vector: `v -> R v`.
    pub fn rotated(&self, rotation: &[f64]) -> Result<Self> {
        let d = self.d;
        if rotation.len() != d * d {
            return Err(invalid("rotation must be d x d"));
        }
        let mut data = vec![0.0; self.data.len()];
        for (src, dst) in self.data.chunks_exact(d).zip(data.chunks_exact_mut(d)) {
            for (r, out) in rotation.chunks_exact(d).zip(dst.iter_mut()) {
                *out = dot(r, src);
            }
            normalize(dst);
        }
        Ok(Self { n: self.n, d, data })
    }
}

/// Threshold `tau` together with its cap measure `p` in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapParams {
    pub tau: f64,
    pub p: f64,
    pub d: usize,
    /// `|cap_probability(tau, d) - p|` at calibration time.
    pub calibration_error: f64,
}

impl CapParams {
    /// Cap whose threshold is given directly; `p` is computed from it.
    pub fn from_tau(tau: f64, d: usize) -> Result<Self> {
        let p = cap_probability(tau, d)?;
        Ok(Self { tau, p, d, calibration_error: 0.0 })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

fn fill_uniform_direction(rng: &mut Rng, out: &mut [f64]) {
    loop {
        for x in out.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let norm2 = dot(out, out);
        if norm2 > 0.0 {
            let norm = norm2.sqrt();
            out.iter_mut().for_each(|x| *x /= norm);
            return;
        }
    }
}

/// Draws `n` i.i.d. uniform vectors on S^{d-1} by normalizing Gaussian
/// vectors. Row `i` uses its own stream `derive_seed(seed, i)`, so the output
/// does not depend on the thread count.
pub fn sample_unit_vectors(n: usize, d: usize, seed: u64) -> Result<UnitVectorSet> {
    if n == 0 || d < 2 {
        return Err(invalid(format!("need n >= 1 and d >= 2, got n={n}, d={d}")));
    }
    let mut data = vec![0.0; n * d];
    data.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
        let mut rng = rng_from_seed(derive_seed(seed, i as u64));
        fill_uniform_direction(&mut rng, row);
    });
    Ok(UnitVectorSet { n, d, data })
}

/// Draws `m` vectors in an `m`-dimensional frame whose Gram matrix has the
/// same law as the Gram matrix of `m` independent uniform vectors in `R^d`.
///
/// Vector `i` is expressed in the orthonormal basis obtained by Gram-Schmidt
/// on vectors `0..=i`: its first `i` coordinates are standard normal and its
/// `i`-th coordinate is the norm of the remaining `d - i` Gaussian components,
/// a `chi(d - i)` variable. Only `O(m^2)` variates are needed instead of `m d`.
/// Requires `2 <= m <= d`.
pub fn sample_gram_frame(m: usize, d: usize, rng: &mut Rng) -> Result<UnitVectorSet> {
    if m < 2 || m > d {
        return Err(invalid(format!("need 2 <= m <= d, got m={m}, d={d}")));
    }
    let mut data = vec![0.0; m * m];
    for (i, row) in data.chunks_exact_mut(m).enumerate() {
        frame_vector(i, d, rng, row);
    }
    Ok(UnitVectorSet { n: m, d: m, data })
}

/// Frame vector with index `index` (see [`sample_gram_frame`]), written into
/// `out` (length at least `index + 1`; remaining entries are zeroed).
pub fn frame_vector(index: usize, d: usize, rng: &mut Rng, out: &mut [f64]) {
    debug_assert!(index < d && index < out.len());
    out.iter_mut().for_each(|x| *x = 0.0);
    for x in out[..index].iter_mut() {
        *x = rng.sample(StandardNormal);
    }
    let chi2 = ChiSquared::new((d - index) as f64).expect("positive degrees of freedom");
    out[index] = chi2.sample(rng).sqrt();
    normalize(out);
}

// ---------------------------------------------------------------------------
// Quadrature

const GL_POINTS: usize = 16;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
fn gauss_legendre() -> &'static [(f64, f64); GL_POINTS] {
    static RULE: OnceLock<[(f64, f64); GL_POINTS]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_POINTS;
        let mut rule = [(0.0, 0.0); GL_POINTS];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            rule[i] = (-x, w);
            rule[n - 1 - i] = (x, w);
        }
        rule
    })
}

fn gl_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre().iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, abs_tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let left = gl_panel(f, a, mid);
    let right = gl_panel(f, mid, b);
    let refined = left + right;
    if depth == 0 || (refined - whole).abs() <= abs_tol {
        return refined;
    }
    adaptive(f, a, mid, left, abs_tol, depth - 1) + adaptive(f, mid, b, right, abs_tol, depth - 1)
}

const COARSE_PANELS: usize = 64;

/// Adaptive Gauss-Legendre integral of `f` over `[a, b]` to a relative
/// tolerance. A uniform pass over 64 panels fixes the magnitude of the
/// integral; each panel is then refined to an absolute tolerance derived
/// from it, so regions where `f` underflows are not over-refined.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let h = (b - a) / COARSE_PANELS as f64;
    let panels: Vec<(f64, f64, f64)> = (0..COARSE_PANELS)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == COARSE_PANELS { b } else { lo + h };
            (lo, hi, gl_panel(&f, lo, hi))
        })
        .collect();
    let coarse: f64 = panels.iter().map(|p| p.2).sum();
    let abs_tol = rel_tol * coarse.abs().max(f64::MIN_POSITIVE);
    panels.iter().map(|&(lo, hi, whole)| adaptive(&f, lo, hi, whole, abs_tol, 30)).sum()
}

/// `sin(theta)^{d-2}`, evaluated as `exp((d-2) ln sin theta)`.
fn angular_density(d: usize) -> impl Fn(f64) -> f64 {
    let power = (d - 2) as f64;
    move |theta: f64| {
        if power == 0.0 {
            1.0
        } else {
            let s = theta.sin();
            if s <= 0.0 {
                0.0
            } else {
                (power * s.ln()).exp()
            }
        }
    }
}

const QUAD_TOL: f64 = 1e-14;

/// Angle `theta in [0, pi]` with `cos(theta) = tau`, accurate near `tau = +-1`.
fn cap_angle(tau: f64) -> f64 {
    if tau >= 0.0 {
        2.0 * ((1.0 - tau) / 2.0).sqrt().asin()
    } else {
        std::f64::consts::PI - 2.0 * ((1.0 + tau) / 2.0).sqrt().asin()
    }
}

/// `P(<u, v> >= tau)` for independent uniform `u, v` on S^{d-1}.
pub fn cap_probability(tau: f64, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(invalid(format!("dimension must be >= 2, got {d}")));
    }
    if !(-1.0..=1.0).contains(&tau) {
        return Err(invalid(format!("tau must lie in [-1, 1], got {tau}")));
    }
    if tau < 0.0 {
        return Ok(1.0 - upper_cap(-tau, d));
    }
    Ok(upper_cap(tau, d))
}

fn upper_cap(tau: f64, d: usize) -> f64 {
    upper_cap_normalized(tau, d, sphere_total(d))
}

/// Integral of the angular density over `[0, pi]`.
fn sphere_total(d: usize) -> f64 {
    2.0 * integrate(angular_density(d), 0.0, std::f64::consts::FRAC_PI_2, QUAD_TOL)
}

fn upper_cap_normalized(tau: f64, d: usize, total: f64) -> f64 {
    if tau == 0.0 {
        return 0.5;
    }
    integrate(angular_density(d), 0.0, cap_angle(tau), QUAD_TOL) / total
}

fn cap_with_total(tau: f64, d: usize, total: f64) -> f64 {
    if tau < 0.0 {
        1.0 - upper_cap_normalized(-tau, d, total)
    } else {
        upper_cap_normalized(tau, d, total)
    }
}

const MAX_BISECTIONS: usize = 200;

/// Finds `tau` with `|cap_probability(tau, d) - p| <= tol` by bisection on
/// `[-1, 1]`. The bracket is shrunk to machine resolution before the
/// tolerance is checked.
pub fn calibrate_tau(p: f64, d: usize, tol: f64) -> Result<CapParams> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("p must lie in (0, 1), got {p}")));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tol must be positive, got {tol}")));
    }
    if d < 2 {
        return Err(invalid(format!("dimension must be >= 2, got {d}")));
    }
    let total = sphere_total(d);
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let (mut p_lo, mut p_hi) = (1.0f64, 0.0f64);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let pm = cap_with_total(mid, d, total);
        if pm > p {
            lo = mid;
            p_lo = pm;
        } else {
            hi = mid;
            p_hi = pm;
        }
    }
    let (tau, err) = if (p_lo - p).abs() <= (p_hi - p).abs() {
        (lo, (p_lo - p).abs())
    } else {
        (hi, (p_hi - p).abs())
    };
    if err > tol {
        return Err(Error::CalibrationFailure { lo, hi });
    }
    Ok(CapParams { tau, p, d, calibration_error: err })
}

/// Exact sampler for the inner product `t = <x, y>` when `y` is uniform on
/// the cap `{y : <x, y> >= tau}`.
///
/// In the angle variable the target density is `sin(theta)^{d-2}` on
/// `[0, theta_max]`. Since `ln sin` is concave, the tangent line of
/// `(d-2) ln sin` at `theta_max` bounds it from above when
/// `theta_max <= pi/2`, giving a truncated-exponential envelope; otherwise a
/// flat envelope at the mode `pi/2` is used.
#[derive(Debug, Clone)]
pub struct CapSampler {
    tau: f64,
    d: usize,
    theta_max: f64,
    rate: f64,
    log_peak: f64,
}

impl CapSampler {
    pub fn new(cap: &CapParams) -> Result<Self> {
        if cap.d < 2 || !(-1.0..=1.0).contains(&cap.tau) {
            return Err(invalid("cap must have d >= 2 and tau in [-1, 1]"));
        }
        if cap.tau >= 1.0 {
            return Err(invalid("degenerate cap: tau = 1"));
        }
        let theta_max = cap_angle(cap.tau);
        let power = (cap.d - 2) as f64;
        let (rate, log_peak) = if theta_max <= std::f64::consts::FRAC_PI_2 && power > 0.0 {
            (power * theta_max.cos() / theta_max.sin(), power * theta_max.sin().ln())
        } else {
            (0.0, 0.0)
        };
        Ok(Self { tau: cap.tau, d: cap.d, theta_max, rate, log_peak })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// One draw of the inner product with the cap center.
    pub fn sample_inner(&self, rng: &mut Rng) -> f64 {
        let power = (self.d - 2) as f64;
        loop {
            let u: f64 = rng.random();
            let theta = if self.rate * self.theta_max > 1e-12 {
                // inverse CDF of density proportional to exp(rate * theta) on [0, theta_max]
                let span = -(-self.rate * self.theta_max).exp_m1();
                self.theta_max + (-u * span).ln_1p() / self.rate
            } else {
                u * self.theta_max
            };
            if !(theta > 0.0 && theta <= self.theta_max) {
                continue;
            }
            if power == 0.0 {
                return theta.cos().max(self.tau);
            }
            let log_target = power * theta.sin().ln();
            let log_env = self.log_peak + self.rate * (theta - self.theta_max);
            let accept: f64 = rng.random();
            if accept.ln() <= log_target - log_env {
                return theta.cos().max(self.tau);
            }
        }
    }

    /// One step of the cap random walk from the unit vector `x`.
    pub fn step(&self, x: &[f64], rng: &mut Rng) -> Vec<f64> {
        let d = x.len();
        let t = self.sample_inner(rng);
        let mut u = vec![0.0; d];
        loop {
            for ui in u.iter_mut() {
                *ui = rng.sample(StandardNormal);
            }
            let proj = dot(&u, x);
            u.iter_mut().zip(x).for_each(|(ui, xi)| *ui -= proj * xi);
            let norm2 = dot(&u, &u);
            if norm2 > 1e-24 {
                let norm = norm2.sqrt();
                u.iter_mut().for_each(|ui| *ui /= norm);
                break;
            }
        }
        let s = (1.0 - t * t).max(0.0).sqrt();
        x.iter().zip(&u).map(|(xi, ui)| t * xi + s * ui).collect()
    }
}

/// Uniform point in the measure-`p` cap around `x`.
pub fn sample_cap(x: &[f64], cap: &CapParams, seed: u64) -> Result<Vec<f64>> {
    if x.len() != cap.d {
        return Err(invalid(format!("vector has dimension {}, cap has {}", x.len(), cap.d)));
    }
    let norm = dot(x, x).sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(invalid(format!("x must be a unit vector, norm is {norm}")));
    }
    let sampler = CapSampler::new(cap)?;
    let mut rng = rng_from_seed(seed);
    Ok(sampler.step(x, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // degree 31 is the exactness limit of a 16-point rule
        let v = gl_panel(&|x: f64| x.powi(30), -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
        let w: f64 = gauss_legendre().iter().map(|r| r.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn single_vector_in_the_plane_has_unit_norm() {
        let v = sample_unit_vectors(1, 2, 99).unwrap();
        let r = v.row(0);
        assert!((r[0] * r[0] + r[1] * r[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_unit_vectors(50, 7, 3).unwrap();
        let b = sample_unit_vectors(50, 7, 3).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        let c = sample_unit_vectors(50, 7, 4).unwrap();
        assert_ne!(a.as_slice(), c.as_slice());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(sample_unit_vectors(0, 3, 1), Err(Error::InvalidParameter(_))));
        assert!(matches!(sample_unit_vectors(3, 1, 1), Err(Error::InvalidParameter(_))));
        assert!(UnitVectorSet::from_rows(1, 2, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn cap_probability_simple_values() {
        assert_eq!(cap_probability(0.0, 17).unwrap(), 0.5);
        assert_eq!(cap_probability(1.0, 40).unwrap(), 0.0);
        assert!((cap_probability(0.5, 3).unwrap() - 0.25).abs() < 1e-14);
        assert!((cap_probability(-1.0, 5).unwrap() - 1.0).abs() < 1e-15);
        // d = 2: the angle between the vectors is uniform on [0, pi]
        assert!((cap_probability(0.5, 2).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn cap_probability_rejects_out_of_range() {
        assert!(cap_probability(1.5, 3).is_err());
        assert!(cap_probability(-1.01, 3).is_err());
        assert!(cap_probability(0.1, 1).is_err());
    }

    #[test]
    fn calibration_symmetric_and_closed_form() {
        let c = calibrate_tau(0.5, 10, 1e-10).unwrap();
        assert!(c.tau.abs() < 1e-10);
        let c = calibrate_tau(0.25, 3, 1e-10).unwrap();
        assert!((c.tau - 0.5).abs() < 1e-10);
    }

    #[test]
    fn calibration_errors() {
        assert!(matches!(calibrate_tau(0.0, 3, 1e-6), Err(Error::InvalidParameter(_))));
        assert!(matches!(calibrate_tau(1.0, 3, 1e-6), Err(Error::InvalidParameter(_))));
        assert!(matches!(calibrate_tau(0.3, 3, 0.0), Err(Error::InvalidParameter(_))));
        // below double resolution of p near 0.3
        assert!(matches!(calibrate_tau(0.3, 3, 1e-30), Err(Error::CalibrationFailure { .. })));
    }

    #[test]
    fn frame_rejects_oversized_frames() {
        let mut rng = rng_from_seed(1);
        assert!(sample_gram_frame(5, 4, &mut rng).is_err());
        let f = sample_gram_frame(4, 4, &mut rng).unwrap();
        assert_eq!(f.n(), 4);
    }

    #[test]
    fn sample_cap_checks_inputs() {
        let cap = calibrate_tau(0.1, 3, 1e-12).unwrap();
        assert!(sample_cap(&[1.0, 0.0], &cap, 1).is_err());
        assert!(sample_cap(&[1.0, 1.0, 0.0], &cap, 1).is_err());
        let y = sample_cap(&[0.0, 0.0, 1.0], &cap, 1).unwrap();
        assert!(y[2] >= cap.tau);
    }
}
