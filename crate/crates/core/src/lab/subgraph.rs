//! Monte Carlo estimators for subgraph probabilities of the geometric graph
//! and for the mixing of the cap random walk.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{derive_seed, mean_se, monte_carlo, rng_from_seed, Estimate};
use crate::sphere::{calibrate_tau, frame_vector, CapParams, CapSampler};

fn frame_dot(frame: &[f64], m: usize, a: usize, b: usize) -> f64 {
    frame[a * m..(a + 1) * m].iter().zip(&frame[b * m..(b + 1) * m]).map(|(x, y)| x * y).sum()
}

/// `p^(ell-1) tau^(ell-2) sqrt(ln(1/p))`, the scale of the subgraph
/// probability error terms (constants omitted).
pub fn subgraph_error_scale(p: f64, tau: f64, ell: usize) -> f64 {
    p.powi(ell as i32 - 1) * tau.powi(ell as i32 - 2) * (1.0 / p).ln().sqrt()
}

/// `P(C_ell in G)` for a cycle on `ell` fresh uniform vectors.
pub fn cycle_probability(cap: &CapParams, ell: usize, trials: u64, seed: u64) -> Result<Estimate> {
    if ell < 3 || ell > cap.d {
        return Err(invalid(format!("cycle length must be in 3..=d, got {ell}")));
    }
    let (d, tau) = (cap.d, cap.tau);
    let st = monte_carlo(
        trials,
        seed,
        || vec![0.0; ell * ell],
        |rng, frame| {
            // vertex 0 is the fixed frame vector e_1; stop at the first missing edge
            frame[0] = 1.0;
            for i in 1..ell {
                frame_vector(i, d, rng, &mut frame[i * ell..(i + 1) * ell]);
                if frame_dot(frame, ell, i - 1, i) < tau {
                    return 0.0;
                }
            }
            if frame_dot(frame, ell, ell - 1, 0) >= tau {
                1.0
            } else {
                0.0
            }
        },
    );
    Ok(st.estimate())
}

/// Probability that the path `v_0 v_1 ... v_ell` is present when the
/// endpoints are pinned with `<v_0, v_ell> = c` and the `ell - 1`
/// intermediate vectors are fresh.
pub fn pinned_path_probability(cap: &CapParams, ell: usize, c: f64, trials: u64, seed: u64) -> Result<Estimate> {
    if ell < 2 || ell + 1 > cap.d {
        return Err(invalid(format!("path length must be in 2..d, got {ell}")));
    }
    if !(-1.0..=1.0).contains(&c) {
        return Err(invalid("pinned inner product must lie in [-1, 1]"));
    }
    let (d, tau) = (cap.d, cap.tau);
    let m = ell + 1;
    let st = monte_carlo(
        trials,
        seed,
        || {
            // frame rows: 0 = v_0, 1 = v_ell, 2.. = v_1 .. v_{ell-1}
            let mut f = vec![0.0; m * m];
            f[0] = 1.0;
            f[m] = c;
            f[m + 1] = (1.0 - c * c).max(0.0).sqrt();
            f
        },
        |rng, frame| {
            let mut prev = 0;
            for j in 1..ell {
                let row = j + 1;
                frame_vector(row, d, rng, &mut frame[row * m..(row + 1) * m]);
                if frame_dot(frame, m, prev, row) < tau {
                    return 0.0;
                }
                prev = row;
            }
            if frame_dot(frame, m, prev, 1) >= tau {
                1.0
            } else {
                0.0
            }
        },
    );
    Ok(st.estimate())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingStep {
    pub step: usize,
    /// Histogram TV between `<x_0, X_k>` and the stationary marginal.
    pub tv: f64,
    /// Batch-means standard error of `tv`.
    pub se: f64,
    /// `tv / (tau^(k-1) sqrt(ln(1/p)))`; infinite when `tau = 0` and `k > 1`.
    pub bound_ratio: f64,
}

pub const MIXING_BATCHES: u64 = 20;

/// Runs `walkers` independent cap walks of `steps` steps from `e_1` and
/// compares the law of `<e_1, X_k>` with the uniform-sphere marginal on
/// `bins` equal-probability bins. The histogram TV is a lower bound on the
/// full TV; the standard error comes from [`MIXING_BATCHES`] batches.
pub fn cap_mixing(cap: &CapParams, steps: usize, walkers: u64, bins: usize, seed: u64) -> Result<Vec<MixingStep>> {
    if steps == 0 || bins < 2 || walkers < MIXING_BATCHES {
        return Err(invalid(format!(
            "cap mixing needs steps >= 1, bins >= 2, walkers >= {MIXING_BATCHES}"
        )));
    }
    let d = cap.d;
    let sampler = CapSampler::new(cap)?;
    // interior edges at the stationary quantiles j / bins (descending thresholds)
    let edges: Vec<f64> = (1..bins)
        .map(|j| calibrate_tau(1.0 - j as f64 / bins as f64, d, 1e-12).map(|c| c.tau))
        .collect::<Result<_>>()?;
    let bin_of = |t: f64| edges.partition_point(|&e| e <= t);

    let per_batch = walkers / MIXING_BATCHES;
    let batches: Vec<Vec<Vec<u64>>> = (0..MIXING_BATCHES)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_from_seed(derive_seed(seed, b));
            let mut counts = vec![vec![0u64; bins]; steps];
            let mut start = vec![0.0; d];
            start[0] = 1.0;
            for _ in 0..per_batch {
                let mut x = start.clone();
                for row in counts.iter_mut() {
                    x = sampler.step(&x, &mut rng);
                    row[bin_of(x[0])] += 1;
                }
            }
            counts
        })
        .collect();

    let tv = |counts: &[u64]| -> f64 {
        let total: u64 = counts.iter().sum();
        0.5 * counts.iter().map(|&c| (c as f64 / total as f64 - 1.0 / bins as f64).abs()).sum::<f64>()
    };
    let log_term = (1.0 / cap.p).ln().sqrt();
    Ok((0..steps)
        .map(|s| {
            let mut pooled = vec![0u64; bins];
            let batch_tv: Vec<f64> = batches
                .iter()
                .map(|b| {
                    pooled.iter_mut().zip(&b[s]).for_each(|(p, c)| *p += c);
                    tv(&b[s])
                })
                .collect();
            let (_, se) = mean_se(&batch_tv);
            let value = tv(&pooled);
            let step = s + 1;
            let scale = cap.tau.abs().powi(step as i32 - 1) * log_term;
            MixingStep { step, tv: value, se, bound_ratio: value / scale }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_probability_at_d3_closed_form_edge() {
        // tau = 0 at d = 3: each edge has probability 1/2; the triangle
        // probability is larger than 1/8 by the closing effect
        let cap = CapParams::from_tau(0.0, 3).unwrap();
        let est = cycle_probability(&cap, 3, 200_000, 1).unwrap();
        assert!(est.mean > 0.125 + 3.0 * est.se, "{est:?}");
    }

    #[test]
    fn pinned_path_with_tau_minus_one_is_certain() {
        let cap = CapParams::from_tau(-1.0, 5).unwrap();
        let est = pinned_path_probability(&cap, 3, 0.2, 1000, 1).unwrap();
        assert_eq!(est.mean, 1.0);
    }

    #[test]
    fn single_step_tv_is_one_minus_p() {
        let cap = calibrate_tau(0.1, 50, 1e-12).unwrap();
        let steps = cap_mixing(&cap, 2, 40_000, 20, 3).unwrap();
        // one step lands uniformly in the cap: the marginal is the stationary
        // law restricted to the top decile, TV = 1 - p
        assert!((steps[0].tv - 0.9).abs() < 1e-12, "{steps:?}");
        assert!(steps[1].tv < steps[0].tv);
    }

    #[test]
    fn rejects_bad_arguments() {
        let cap = calibrate_tau(0.1, 50, 1e-12).unwrap();
        assert!(cycle_probability(&cap, 2, 10, 1).is_err());
        assert!(pinned_path_probability(&cap, 3, 1.5, 10, 1).is_err());
        assert!(cap_mixing(&cap, 0, 100, 10, 1).is_err());
    }
}
