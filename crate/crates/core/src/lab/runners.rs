use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use super::config::{Experiment, ExperimentConfig, Generator};
use super::report::{Aggregate, Comparison, RunOutput, RunReport};
use super::subgraph::{cap_mixing, cycle_probability, pinned_path_probability, subgraph_error_scale};
use crate::decomp::{contribution_bound, decompose, validate_ears, walk_graph_stats, GraphDecomposition, SimpleGraph};
use crate::error::{invalid, Result};
use crate::graphgen::{center, erdos_renyi, geometric_graph, read_edge_list, write_edge_list, Adjacency, GraphMetadata};
use crate::rng::{derive_seed, mean_se, Estimate, PRNG_ALGORITHM};
use crate::spectral::{
    eigenvalues_symmetric, esd_histogram, ks_distance, moment_of, second_eigenvalue, semicircle_cdf, write_eigenvalues_csv,
    write_esd_csv,
};
use crate::sphere::{calibrate_tau, sample_unit_vectors, CapParams};
use crate::walks::{brute_trace_oracle, check_counting_bound, nu_alpha_moment, semicircle_moment, sparse_tree_limit};

/// Width in standard errors of the trace-oracle comparisons.
pub const ORACLE_Z: f64 = 4.0;

/// Runs one experiment and times it.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let mut out = match cfg.experiment {
        Experiment::Lsd => run_spectral(cfg, true)?,
        Experiment::Moments => run_spectral(cfg, false)?,
        Experiment::SecondEigSweep => run_second_eig_sweep(cfg)?,
        Experiment::SubgraphProb => run_subgraph_prob(cfg)?,
        Experiment::CapMixing => run_cap_mixing(cfg)?,
        Experiment::Decomp => run_decomp(cfg)?,
        Experiment::Oracle => run_oracle(cfg)?,
        Experiment::Sample => run_sample(cfg)?,
    };
    out.report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

pub fn run_lsd(cfg: &ExperimentConfig) -> Result<RunOutput> {
    run(&ExperimentConfig { experiment: Experiment::Lsd, ..cfg.clone() })
}

pub fn run_moments(cfg: &ExperimentConfig) -> Result<RunOutput> {
    run(&ExperimentConfig { experiment: Experiment::Moments, ..cfg.clone() })
}

pub fn run_second_eig(cfg: &ExperimentConfig) -> Result<RunOutput> {
    run(&ExperimentConfig { experiment: Experiment::SecondEigSweep, ..cfg.clone() })
}

fn to_string(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("writers emit UTF-8"))
}

#[derive(Debug, Clone)]
pub struct SampledGraph {
    pub adjacency: Adjacency,
    pub cap: Option<CapParams>,
    pub metadata: GraphMetadata,
}

/// One graph from the configured generator.
pub fn sample_graph(generator: Generator, n: usize, d: Option<usize>, p: f64, tol: f64, seed: u64) -> Result<SampledGraph> {
    let (adjacency, cap) = match generator {
        Generator::Geometric => {
            let d = d.ok_or_else(|| invalid("geometric graphs need a dimension d"))?;
            let cap = calibrate_tau(p, d, tol)?;
            let vectors = sample_unit_vectors(n, d, seed)?;
            (geometric_graph(&vectors, &cap)?, Some(cap))
        }
        Generator::ErdosRenyi => (erdos_renyi(n, p, seed)?, None),
    };
    let metadata = GraphMetadata {
        generator: match generator {
            Generator::Geometric => "geometric".into(),
            Generator::ErdosRenyi => "erdos_renyi".into(),
        },
        prng: PRNG_ALGORITHM.into(),
        seed,
        n,
        p,
        d: cap.map(|c| c.d),
        tau: cap.map(|c| c.tau),
        edges: adjacency.edge_count(),
    };
    Ok(SampledGraph { adjacency, cap, metadata })
}

/// Largest deviation from `sum lambda = 0` and `sum lambda^2 = 2|E|`, relative.
fn trace_identity_error(eigs: &[f64], edges: usize) -> f64 {
    let abs_sum: f64 = eigs.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
    let sum: f64 = eigs.iter().sum();
    let sumsq: f64 = eigs.iter().map(|x| x * x).sum();
    let target = 2.0 * edges as f64;
    (sum.abs() / abs_sum).max((sumsq - target).abs() / target.max(1.0))
}

const TRACE_TOL: f64 = 1e-8;

struct TrialSpectrum {
    seed: u64,
    edges: usize,
    eig_a: Vec<f64>,
    eig_q: Option<Vec<f64>>,
    trace_error: f64,
}

fn run_spectral(cfg: &ExperimentConfig, with_esd: bool) -> Result<RunOutput> {
    let p = cfg.resolved_p()?;
    let n = cfg.n;
    let sparse = cfg.is_sparse();
    let scale = if sparse { cfg.alpha.expect("sparse runs have alpha").sqrt() } else { (n as f64 * p * (1.0 - p)).sqrt() };
    let mut report = RunReport::new(cfg);
    let seeds: Vec<u64> = (0..cfg.trials).map(|t| derive_seed(cfg.seed, t)).collect();
    report.prng.derived = seeds.clone();

    let trials: Vec<TrialSpectrum> = seeds
        .par_iter()
        .map(|&seed| {
            let g = sample_graph(cfg.generator, n, cfg.d, p, cfg.tol, seed)?;
            let eig_a = eigenvalues_symmetric(&g.adjacency.dense())?;
            let eig_q = if sparse { None } else { Some(eigenvalues_symmetric(&center(&g.adjacency, p)?.dense())?) };
            let trace_error = trace_identity_error(&eig_a, g.adjacency.edge_count());
            Ok(TrialSpectrum { seed, edges: g.adjacency.edge_count(), eig_a, eig_q, trace_error })
        })
        .collect::<Result<_>>()?;

    let ks_of = |e: &[f64]| ks_distance(e, scale, semicircle_cdf);
    let mut ks_a = Vec::new();
    let mut ks_q = Vec::new();
    let mut mom_a: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    let mut mom_q: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (t, tr) in trials.iter().enumerate() {
        let moments_a: BTreeMap<u32, f64> = (1..=cfg.k_max).map(|k| (k, moment_of(&tr.eig_a, k, scale))).collect();
        let moments_q: Option<BTreeMap<u32, f64>> =
            tr.eig_q.as_ref().map(|q| (1..=cfg.k_max).map(|k| (k, moment_of(q, k, scale))).collect());
        let ka = ks_of(&tr.eig_a)?;
        let kq = tr.eig_q.as_deref().map(ks_of).transpose()?;
        ks_a.push(ka);
        if let Some(kq) = kq {
            ks_q.push(kq);
        }
        for (k, v) in &moments_a {
            mom_a.entry(*k).or_default().push(*v);
        }
        if let Some(mq) = &moments_q {
            for (k, v) in mq {
                mom_q.entry(*k).or_default().push(*v);
            }
        }
        report.per_trial.push(json!({
            "trial": t,
            "seed": tr.seed,
            "edges": tr.edges,
            "ks": ka,
            "ks_centered": kq,
            "lambda_second": second_eigenvalue(&tr.eig_a).ok(),
            "moments": moments_a,
            "moments_centered": moments_q,
            "trace_identity_error": tr.trace_error,
        }));
    }

    let estimate = |xs: &[f64]| {
        let (mean, se) = mean_se(xs);
        Estimate { mean, se, trials: xs.len() as u64 }
    };
    let push_est = |report: &mut RunReport, name: String, xs: &[f64]| {
        let est = estimate(xs);
        let agg = if xs.len() >= 2 { Aggregate::estimate(name, &est) } else { Aggregate::exact(name, est.mean) };
        report.aggregates.push(agg);
        est
    };
    let z = cfg.thresholds.z;
    let several = cfg.trials >= 2;
    if !sparse && with_esd {
        let ks = push_est(&mut report, "ks".into(), &ks_a);
        push_est(&mut report, "ks_centered".into(), &ks_q);
        report.compare(Comparison::at_most("ks_semicircle", ks.mean, cfg.thresholds.ks_max));
    }
    let mut table = String::from("k,mean,se,mean_centered,se_centered,reference\n");
    for k in 1..=cfg.k_max {
        let ea = push_est(&mut report, format!("moment_{k}"), &mom_a[&k]);
        let eq = mom_q.get(&k).map(|v| push_est(&mut report, format!("moment_centered_{k}"), v));
        let reference = if sparse { nu_alpha_moment(k, cfg.alpha.unwrap())?.value } else { semicircle_moment(k)?.value };
        let fmt_opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        table.push_str(&format!(
            "{k},{:e},{},{},{},{:e}\n",
            ea.mean,
            fmt_opt(several.then_some(ea.se)),
            fmt_opt(eq.map(|e| e.mean)),
            fmt_opt(eq.filter(|_| several).map(|e| e.se)),
            reference
        ));
        if k % 2 == 1 {
            // odd moments of the centered matrix vanish in the limit; the
            // first one is zero by construction
            if let (Some(eq), true) = (eq, several && k >= 3 && (!with_esd || k <= 5)) {
                report.compare(Comparison::within_se(format!("odd_moment_centered_{k}"), &eq, 0.0, z));
            }
            continue;
        }
        if with_esd && k > 6 {
            continue;
        }
        if sparse {
            let tree = sparse_tree_limit(k, cfg.alpha.unwrap())?;
            report.aggregates.push(Aggregate::exact(format!("tree_limit_{k}"), tree));
            if several {
                let c = Comparison::within_se(format!("moment_{k}"), &ea, reference, z);
                if !c.pass && (ea.mean - tree).abs() <= z * ea.se {
                    report.warnings.push(format!(
                        "moment_{k} = {:.4} misses the closed form {reference:.4} but matches the tree-walk limit {tree:.4}",
                        ea.mean
                    ));
                }
                report.compare(c);
            }
        } else {
            let eq = eq.expect("dense runs carry the centered spectrum");
            report.compare(Comparison::within_rel(
                format!("moment_centered_{k}"),
                eq.mean,
                reference,
                cfg.thresholds.moment_rel_tol,
            ));
        }
    }
    if sparse && !several {
        report.warnings.push("one trial: sparse moments are not compared without a standard error".into());
    }
    let worst = trials.iter().map(|t| t.trace_error).fold(0.0, f64::max);
    report.aggregates.push(Aggregate::exact("trace_identity_error", worst));
    report.compare(Comparison::at_most("trace_identity", worst, TRACE_TOL));

    let mut out = RunOutput::new(report);
    out.attach("moments.csv", table);
    if with_esd {
        let first = &trials[0];
        let range = (cfg.range[0], cfg.range[1]);
        out.attach("eigenvalues.csv", to_string(|w| write_eigenvalues_csv(&first.eig_a, w))?);
        let h = esd_histogram(&first.eig_a, scale, cfg.bins, range)?;
        out.attach("esd.csv", to_string(|w| write_esd_csv(&h, w))?);
        if let Some(q) = &first.eig_q {
            out.attach("eigenvalues_centered.csv", to_string(|w| write_eigenvalues_csv(q, w))?);
            let h = esd_histogram(q, scale, cfg.bins, range)?;
            out.attach("esd_centered.csv", to_string(|w| write_esd_csv(&h, w))?);
        }
    }
    Ok(out)
}

/// Least-squares slope of `y` on `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn run_second_eig_sweep(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let p = cfg.resolved_p()?;
    let mut report = RunReport::new(cfg);
    let mut rows = Vec::new();
    let mut csv = String::from("n,d,p,tau,lambda,lambda_over_sqrt_np,log_dominance\n");
    for (i, &n) in cfg.sweep_n.iter().enumerate() {
        let d = match cfg.sweep_d.get(i) {
            Some(&d) => d,
            None => ((cfg.d_factor * n as f64 * p).round() as usize).max(2),
        };
        let point_seed = derive_seed(cfg.seed, i as u64);
        report.prng.derived.push(point_seed);
        let lambdas: Vec<f64> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let g = sample_graph(cfg.generator, n, Some(d), p, cfg.tol, derive_seed(point_seed, t))?;
                second_eigenvalue(&eigenvalues_symmetric(&g.adjacency.dense())?)
            })
            .collect::<Result<_>>()?;
        let tau = match cfg.generator {
            Generator::Geometric => Some(calibrate_tau(p, d, cfg.tol)?.tau),
            Generator::ErdosRenyi => None,
        };
        let (lambda, se) = mean_se(&lambdas);
        let np = n as f64 * p;
        let ratio = lambda / np.sqrt();
        let dominance = tau.map(|t| t * np / (np.sqrt() * (n as f64).ln().powi(4)));
        rows.push((n, d, np, lambda, ratio));
        report.per_trial.push(json!({
            "n": n, "d": d, "p": p, "tau": tau, "lambda": lambda,
            "lambda_se": if lambdas.len() >= 2 { Some(se) } else { None },
            "lambda_over_sqrt_np": ratio, "log_dominance": dominance, "trials": lambdas,
        }));
        csv.push_str(&format!(
            "{n},{d},{p},{},{lambda:e},{ratio:e},{}\n",
            tau.map(|t| format!("{t:e}")).unwrap_or_default(),
            dominance.map(|x| format!("{x:e}")).unwrap_or_default()
        ));
        let [lo, hi] = cfg.thresholds.lambda_ratio;
        report.compare(Comparison::interval(format!("lambda_ratio_n{n}"), ratio, None, Some(lo), Some(hi)));
        if let Some(dom) = dominance {
            report.compare(Comparison::interval(format!("log_dominance_n{n}"), dom, None, None, Some(1.0)));
        }
    }
    if rows.len() >= 2 {
        let x: Vec<f64> = rows.iter().map(|r| r.2.ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.3.ln()).collect();
        let slope = ls_slope(&x, &y);
        report.aggregates.push(Aggregate::exact("loglog_slope", slope));
        let [lo, hi] = cfg.thresholds.slope;
        report.compare(Comparison::interval("loglog_slope", slope, Some(0.5), Some(lo), Some(hi)));
    }
    let mut out = RunOutput::new(report);
    out.attach("sweep.csv", csv);
    Ok(out)
}

fn dimensions(cfg: &ExperimentConfig) -> Result<Vec<usize>> {
    if cfg.sweep_d.is_empty() {
        Ok(vec![cfg.dimension()?])
    } else {
        Ok(cfg.sweep_d.clone())
    }
}

fn run_subgraph_prob(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let p = cfg.resolved_p()?;
    let ell = cfg.ell;
    let p_ell = p.powi(ell as i32);
    let mut report = RunReport::new(cfg);
    if p_ell * (cfg.trials as f64) < 100.0 {
        report.warnings.push(format!(
            "p^ell * trials = {:.1} < 100: expect few hits and a coarse standard error",
            p_ell * cfg.trials as f64
        ));
    }
    let mut csv = String::from("d,tau,ell,cycle,cycle_se,path,path_se,p_ell,cycle_excess,cycle_ratio,path_ratio\n");
    let mut excesses = Vec::new();
    for (i, d) in dimensions(cfg)?.into_iter().enumerate() {
        let cap = calibrate_tau(p, d, cfg.tol)?;
        let (s_cycle, s_path) = (derive_seed(cfg.seed, 2 * i as u64), derive_seed(cfg.seed, 2 * i as u64 + 1));
        report.prng.derived.extend([s_cycle, s_path]);
        let cycle = cycle_probability(&cap, ell, cfg.trials, s_cycle)?;
        let path = pinned_path_probability(&cap, ell, cfg.pinned_inner, cfg.trials, s_path)?;
        let scale = subgraph_error_scale(p, cap.tau, ell);
        let excess = cycle.mean - p_ell;
        let (cycle_ratio, path_ratio) = (excess.abs() / scale, (path.mean - p_ell).abs() / scale);
        report.aggregates.push(Aggregate::estimate(format!("cycle_d{d}"), &cycle));
        report.aggregates.push(Aggregate::estimate(format!("path_d{d}"), &path));
        report.per_trial.push(json!({
            "d": d, "tau": cap.tau, "cycle": cycle, "path": path, "p_ell": p_ell,
            "cycle_excess": excess, "cycle_ratio": cycle_ratio, "path_ratio": path_ratio,
        }));
        csv.push_str(&format!(
            "{d},{:e},{ell},{:e},{:e},{:e},{:e},{p_ell:e},{excess:e},{cycle_ratio:e},{path_ratio:e}\n",
            cap.tau, cycle.mean, cycle.se, path.mean, path.se
        ));
        if ell == 3 {
            report.compare(Comparison::at_least(format!("triangle_excess_z_d{d}"), excess / cycle.se, cfg.thresholds.z));
        }
        excesses.push((d, excess.abs()));
    }
    excesses.sort_by_key(|e| e.0);
    for w in excesses.windows(2) {
        let ((da, ea), (db, eb)) = (w[0], w[1]);
        report.compare(Comparison::interval(format!("excess_decreases_d{da}_d{db}"), eb, Some(ea), None, Some(ea)));
    }
    let mut out = RunOutput::new(report);
    out.attach("subgraph.csv", csv);
    Ok(out)
}

fn run_cap_mixing(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let p = cfg.resolved_p()?;
    let mut report = RunReport::new(cfg);
    let mut csv = String::from("d,tau,step,tv,se,bound_ratio\n");
    for (i, d) in dimensions(cfg)?.into_iter().enumerate() {
        let cap = calibrate_tau(p, d, cfg.tol)?;
        let seed = derive_seed(cfg.seed, i as u64);
        report.prng.derived.push(seed);
        let steps = cap_mixing(&cap, cfg.k, cfg.trials, cfg.tv_bins, seed)?;
        for s in &steps {
            csv.push_str(&format!("{d},{:e},{},{:e},{:e},{:e}\n", cap.tau, s.step, s.tv, s.se, s.bound_ratio));
            report.aggregates.push(Aggregate {
                name: format!("tv_d{d}_k{}", s.step),
                value: s.tv,
                se: Some(s.se),
                exact: false,
            });
        }
        if steps.len() >= 3 {
            report.compare(Comparison::interval(
                format!("tv_decay_d{d}"),
                steps[2].tv,
                Some(steps[0].tv),
                None,
                Some(steps[0].tv),
            ));
        }
        report.per_trial.push(json!({ "d": d, "tau": cap.tau, "steps": steps }));
    }
    let mut out = RunOutput::new(report);
    out.attach("mixing.csv", csv);
    Ok(out)
}

/// Loads the configured edge list, or samples a graph from the generator.
fn input_graph(cfg: &ExperimentConfig) -> Result<(Adjacency, Option<CapParams>)> {
    match &cfg.graph_file {
        Some(path) => {
            let file = File::open(path).map_err(|e| invalid(format!("cannot open {}: {e}", path.display())))?;
            Ok((read_edge_list(BufReader::new(file))?, None))
        }
        None => {
            let g = sample_graph(cfg.generator, cfg.n, cfg.d, cfg.resolved_p()?, cfg.tol, cfg.seed)?;
            Ok((g.adjacency, g.cap))
        }
    }
}

/// Decomposition of every connected component, in the input labels.
pub fn decompose_components(g: &SimpleGraph) -> Result<Vec<GraphDecomposition>> {
    g.components()
        .into_iter()
        .map(|vertices| {
            let index: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let local_edges =
                g.edges().iter().filter(|e| index.contains_key(&e.0)).map(|&(a, b)| (index[&a], index[&b]));
            let sub = SimpleGraph::from_edges(vertices.len(), local_edges)?;
            let dec = decompose(&sub)?;
            Ok(relabel_decomposition(dec, &vertices))
        })
        .collect()
}

fn relabel_decomposition(mut dec: GraphDecomposition, labels: &[usize]) -> GraphDecomposition {
    let map = |v: &mut usize| *v = labels[*v];
    let t = &mut dec.block_cut_tree;
    for c in t.two_edge_connected_components.iter_mut().chain(t.bridge_components.iter_mut()) {
        c.vertices.iter_mut().for_each(map);
        c.edges.iter_mut().for_each(|e| *e = (labels[e.0], labels[e.1]));
    }
    t.bridges.iter_mut().for_each(|e| *e = (labels[e.0], labels[e.1]));
    t.junctions.iter_mut().for_each(map);
    for ears in dec.component_ears.iter_mut() {
        map(&mut ears.root);
        ears.ears.iter_mut().flatten().for_each(map);
    }
    dec
}

fn run_decomp(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (adjacency, cap) = input_graph(cfg)?;
    let g = SimpleGraph::from(&adjacency);
    let mut report = RunReport::new(cfg);
    let components = decompose_components(&g)?;

    let mut all_valid = true;
    let mut covered = 0;
    let mut validations = Vec::new();
    for dec in &components {
        let t = &dec.block_cut_tree;
        covered += t.bridges.len();
        for (comp, ears) in t.two_edge_connected_components.iter().zip(&dec.component_ears) {
            covered += comp.edges.len();
            let sub = SimpleGraph::from_edges(g.n(), comp.edges.iter().copied())?;
            let v = validate_ears(&sub, ears);
            all_valid &= v.valid;
            validations.push(v);
        }
    }
    report.compare(Comparison::flag("ears_valid", all_valid));
    report.compare(Comparison::flag("edge_partition", covered == g.edge_count()));

    let mut walks = Vec::new();
    for walk in &cfg.walks {
        let stats = walk_graph_stats(walk)?;
        let bound = match cap {
            Some(c) if c.tau > 0.0 => contribution_bound(&stats, c.p, c.tau, cfg.c_const).ok(),
            _ => None,
        };
        let chord_free = stats.chords == 0;
        let c3g = chord_free.then(|| stats.c + stats.t >= 3 * stats.g);
        let per_component_ok = stats
            .ear_lengths
            .iter()
            .all(|lens| lens.len() > lens.iter().skip(1).filter(|&&l| l == 2).count());
        walks.push(json!({
            "walk": walk, "stats": stats, "contribution_bound": bound,
            "c_at_least_3g_minus_t": c3g, "excess_exceeds_length2_ears": per_component_ok,
        }));
    }
    let junctions: Vec<usize> = components.iter().flat_map(|d| d.block_cut_tree.junctions.clone()).collect();
    report.details = json!({
        "n": g.n(),
        "edges": g.edge_count(),
        "junctions": junctions,
        "components": components,
        "ear_validation": validations,
        "walks": walks,
    });
    Ok(RunOutput::new(report))
}

fn run_oracle(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let p = cfg.resolved_p()?;
    let d = cfg.dimension()?;
    let (n, k) = (cfg.n, cfg.k);
    let mut report = RunReport::new(cfg);
    report.prng.derived = (0..cfg.trials).map(|t| derive_seed(cfg.seed, t)).collect();
    let oracle = brute_trace_oracle(n, d, p, k, cfg.trials as usize, cfg.seed)?;
    let se = &oracle.standard_errors;
    let est = |mean: f64, se: f64| Estimate { mean, se, trials: oracle.trials as u64 };
    report.aggregates.push(Aggregate::estimate("S1_hat", &est(oracle.s1_hat, se.s1)));
    report.aggregates.push(Aggregate::estimate("S2_hat", &est(oracle.s2_hat, se.s2)));
    report.aggregates.push(Aggregate::estimate("total_hat", &est(oracle.total_hat, se.total)));
    report.aggregates.push(Aggregate::estimate("spectral_total", &est(oracle.spectral_total, se.spectral)));
    report.aggregates.push(Aggregate::exact("S1_exact", oracle.s1_exact));

    // per trial the walk sum and the spectral trace agree up to rounding
    let half = (ORACLE_Z * se.difference).max(1e-9 * oracle.total_hat.abs().max(1.0));
    let diff = oracle.total_hat - oracle.spectral_total;
    report.compare(Comparison::interval("walk_sum_vs_spectral", diff, Some(0.0), Some(-half), Some(half)));
    if k % 2 == 1 {
        report.compare(Comparison::interval("S1_odd_zero", oracle.s1_hat, Some(0.0), Some(0.0), Some(0.0)));
    } else {
        report.compare(Comparison::within_se("S1_vs_tree_count", &est(oracle.s1_hat, se.s1), oracle.s1_exact, ORACLE_Z));
    }

    let buckets = check_counting_bound(n, k)?;
    report.compare(Comparison::flag("counting_bound", buckets.iter().all(|b| b.within_bound)));
    let mut csv = String::from("e,b,g,count,bound\n");
    for b in &buckets {
        csv.push_str(&format!("{},{},{},{},{:e}\n", b.e, b.b, b.g, b.count, b.bound));
    }
    report.details = json!({ "oracle": oracle, "counting": buckets });
    let mut out = RunOutput::new(report);
    out.attach("counting.csv", csv);
    Ok(out)
}

fn run_sample(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let g = sample_graph(cfg.generator, cfg.n, cfg.d, cfg.resolved_p()?, cfg.tol, cfg.seed)?;
    let mut report = RunReport::new(cfg);
    report.aggregates.push(Aggregate::exact("edges", g.adjacency.edge_count() as f64));
    report.details = serde_json::to_value(&g.metadata)?;
    let mut out = RunOutput::new(report);
    out.attach("graph.txt", to_string(|w| write_edge_list(&g.adjacency, w))?);
    out.attach("graph.json", serde_json::to_string_pretty(&g.metadata)? + "\n");
    Ok(out)
}
