//! Acceptance criteria, run in order with one PASS/FAIL line each.
//!
//! `cargo test -p rgglab --test acceptance` (add `-- 3 7` to run a subset).

mod common;

use std::time::{Duration, Instant};

use rgglab::decomp::{block_cut_tree, ear_decomposition, validate_ears, SimpleGraph};
use rgglab::graphgen::geometric_graph;
use rgglab::lab::{run, Experiment, ExperimentConfig, Generator};
use rgglab::lab::subgraph::cycle_probability;
use rgglab::spectral::{ecdf_distance, eigenvalues_symmetric};
use rgglab::sphere::{calibrate_tau, sample_unit_vectors};
use rgglab::walks::{brute_trace_oracle, check_counting_bound, multiplicity_reduce, tree_moment_check};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn aggregate(report: &rgglab::lab::RunReport, name: &str) -> Result<(f64, Option<f64>), String> {
    report.aggregate(name).map(|a| (a.value, a.se)).ok_or_else(|| format!("report lacks {name}"))
}

fn tau_d3() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [0.01, 0.1, 0.25, 0.5] {
        let tau = calibrate_tau(p, 3, 1e-10).map_err(|e| e.to_string())?.tau;
        worst = worst.max((tau - (1.0 - 2.0 * p)).abs());
    }
    ensure(worst <= 1e-9, format!("max |tau - (1 - 2p)| = {worst:.2e}"))
}

fn tau_bounds() -> Outcome {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in [1e-4, 0.01, 0.1, 0.4] {
        for d in [10, 100, 1000] {
            let tau = calibrate_tau(p, d, 1e-12).map_err(|e| e.to_string())?.tau;
            let r = tau * (d as f64 / (1.0 / p).ln()).sqrt();
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    ensure(lo >= 0.0 && hi <= 2.0, format!("tau sqrt(d / ln(1/p)) in [{lo:.4}, {hi:.4}]"))
}

fn semicircle_fit() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for generator in [Generator::Geometric, Generator::ErdosRenyi] {
        let mut cfg = ExperimentConfig::preset(Experiment::Lsd);
        cfg.generator = generator;
        let report = run(&cfg).map_err(|e| e.to_string())?.report;
        let (ks, _) = aggregate(&report, "ks")?;
        ok &= ks <= 0.05;
        let mut ms = Vec::new();
        for (k, target) in [(2, 1.0), (4, 2.0), (6, 5.0)] {
            // moments of the centered matrix A - p(J - I); see README
            let (m, _) = aggregate(&report, &format!("moment_centered_{k}"))?;
            ok &= (m - target).abs() <= 0.10 * target;
            ms.push(format!("{m:.3}"));
        }
        parts.push(format!("{generator:?}: ks {ks:.4}, m2/4/6 {}", ms.join("/")));
    }
    ensure(ok, parts.join("; "))
}

fn sparse_moments() -> Outcome {
    let cfg = ExperimentConfig::preset(Experiment::Moments);
    let report = run(&cfg).map_err(|e| e.to_string())?.report;
    let a: f64 = 2.23;
    let targets = [(2, 1.0), (4, 2.0 + 1.0 / a), (6, 5.0 + 2.0 / a + 1.0 / (a * a))];
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, target) in targets {
        let (m, se) = aggregate(&report, &format!("moment_{k}"))?;
        let se = se.ok_or("moment without standard error")?;
        let z = (m - target) / se;
        ok &= z.abs() <= 3.0;
        parts.push(format!("m{k} {m:.4} vs {target:.4} ({z:+.1} SE)"));
    }
    ensure(ok, parts.join(", "))
}

fn tree_moments() -> Outcome {
    let (d, p) = (100, 0.05);
    let trees = [
        ("edge", SimpleGraph::from_edges(2, [(0, 1)]).unwrap()),
        ("path3", SimpleGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap()),
        ("star4", SimpleGraph::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (name, t)) in trees.iter().enumerate() {
        let est = tree_moment_check(t, d, p, 1_000_000, 100 + i as u64).map_err(|e| e.to_string())?;
        let target = (p * (1.0 - p)).powi(t.edge_count() as i32);
        let z = (est.mean - target) / est.se;
        ok &= z.abs() <= 3.0;
        parts.push(format!("{name} {z:+.2} SE"));
    }
    ensure(ok, parts.join(", "))
}

fn multiplicity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ranges = true;
    for k in 1..=20u32 {
        for p in [0.01, 0.1, 0.25, 0.5 - 1e-9, 0.5] {
            let (alpha, beta) = multiplicity_reduce(k, p).map_err(|e| e.to_string())?;
            for a in [0.0, 1.0] {
                worst = worst.max(((a - p).powi(k as i32) - (alpha * (a - p) + beta)).abs());
            }
            ranges &= (0.0..=1.0).contains(&alpha) && beta.abs() <= 2.0 * p * (1.0 - p);
        }
    }
    ensure(worst < 1e-14 && ranges, format!("max identity error {worst:.1e}, ranges hold: {ranges}"))
}

fn decomposition() -> Outcome {
    let mut report = common::ExhaustiveReport::default();
    for n in 1..=7 {
        common::exhaustive_decomposition(n, &mut report);
    }
    let (g2, caption) = common::ear_fixture();
    let ears = ear_decomposition(&g2, 0).map_err(|e| e.to_string())?;
    let fig_ears = ears.len() == 4 && validate_ears(&g2, &ears).valid && validate_ears(&g2, &caption).valid;
    let junctions = block_cut_tree(&common::bridge_fixture()).map_err(|e| e.to_string())?.junctions;
    // {2, 8} in the fixture's 1-based labels
    let fig_junctions = junctions == vec![1, 7];
    let ok = report.failures.is_empty() && report.connected == 1_866_256 + 26_704 + 728 + 38 + 4 + 1 + 1;
    ensure(
        ok && fig_ears && fig_junctions,
        format!(
            "{} connected graphs ({} 2-edge-connected), {} failures; fixtures ears {fig_ears}, junctions {fig_junctions}",
            report.connected,
            report.two_edge_connected,
            report.failures.len()
        ),
    )
}

fn counting_bound() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (n, k) in [(5, 6), (4, 8)] {
        let buckets = check_counting_bound(n, k).map_err(|e| e.to_string())?;
        let worst = buckets.iter().map(|b| b.count as f64 / b.bound).fold(0.0, f64::max);
        ok &= buckets.iter().all(|b| b.within_bound && b.count as f64 <= b.bound);
        parts.push(format!("(n={n}, k={k}) {} buckets, max count/bound {worst:.2e}", buckets.len()));
    }
    ensure(ok, parts.join("; "))
}

fn trace_oracle() -> Outcome {
    let r = brute_trace_oracle(8, 500, 0.2, 4, 10_000, 2024).map_err(|e| e.to_string())?;
    let se = &r.standard_errors;
    let diff = r.total_hat - r.spectral_total;
    let z_s1 = (r.s1_hat - r.s1_exact) / se.s1;
    ensure(
        diff.abs() <= 4.0 * se.total && z_s1.abs() <= 4.0,
        format!(
            "total {:.5} vs spectral {:.5} (diff {diff:.1e}, SE {:.1e}); S1 {:.4} vs exact {:.4} ({z_s1:+.2} SE)",
            r.total_hat, r.spectral_total, se.total, r.s1_hat, r.s1_exact
        ),
    )
}

fn subgraphs() -> Outcome {
    let p: f64 = 0.05;
    let target = p.powi(3);
    let c200 = calibrate_tau(p, 200, 1e-12).map_err(|e| e.to_string())?;
    let c800 = calibrate_tau(p, 800, 1e-12).map_err(|e| e.to_string())?;
    let e200 = cycle_probability(&c200, 3, 10_000_000, 31).map_err(|e| e.to_string())?;
    let e800 = cycle_probability(&c800, 3, 10_000_000, 32).map_err(|e| e.to_string())?;
    let z = (e200.mean - target) / e200.se;
    let (x200, x800) = ((e200.mean - target).abs(), (e800.mean - target).abs());
    ensure(
        z >= 3.0 && x800 < x200,
        format!("d=200 excess {x200:.3e} ({z:.1} SE); d=800 excess {x800:.3e}"),
    )
}

fn second_eigenvalue() -> Outcome {
    let cfg = ExperimentConfig::preset(Experiment::SecondEigSweep);
    let report = run(&cfg).map_err(|e| e.to_string())?.report;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ok = true;
    let mut ratios = Vec::new();
    for row in &report.per_trial {
        let n = row["n"].as_f64().ok_or("missing n")?;
        let p = row["p"].as_f64().ok_or("missing p")?;
        let lambda = row["lambda"].as_f64().ok_or("missing lambda")?;
        let np = n * p;
        let ratio = lambda / np.sqrt();
        ok &= (1.5..=4.0).contains(&ratio);
        ratios.push(format!("{ratio:.2}"));
        xs.push(np.ln());
        ys.push(lambda.ln());
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    ok &= xs.len() == 4 && (0.4..=0.6).contains(&slope);
    ensure(ok, format!("lambda/sqrt(np) = [{}], slope {slope:.3}", ratios.join(", ")))
}

fn rank_inequality() -> Outcome {
    let (n, d, p) = (500, 100, 0.05);
    let cap = calibrate_tau(p, d, 1e-12).map_err(|e| e.to_string())?;
    let v = sample_unit_vectors(n, d, 12).map_err(|e| e.to_string())?;
    let a = geometric_graph(&v, &cap).map_err(|e| e.to_string())?.dense();
    let ea = eigenvalues_symmetric(&a).map_err(|e| e.to_string())?;
    let eb = eigenvalues_symmetric(&a.plus_constant(-p)).map_err(|e| e.to_string())?;
    let dist = ecdf_distance(&ea, &eb);
    let bound = 1.0 / n as f64 + 1e-6;
    ensure(dist <= bound, format!("sup |F_A - F_(A - pJ)| = {dist:.5} <= {bound:.5}"))
}

fn criteria() -> Vec<Criterion> {
    let s = Duration::from_secs;
    vec![
        Criterion { id: 1, name: "tau calibration at d = 3", budget: s(1), check: tau_d3 },
        Criterion { id: 2, name: "two-sided tau bounds", budget: s(5), check: tau_bounds },
        Criterion { id: 3, name: "dense spectrum vs semicircle", budget: s(300), check: semicircle_fit },
        Criterion { id: 4, name: "sparse moments vs closed form", budget: s(600), check: sparse_moments },
        Criterion { id: 5, name: "tree moment identity", budget: s(60), check: tree_moments },
        Criterion { id: 6, name: "multiplicity reduction", budget: s(1), check: multiplicity },
        Criterion { id: 7, name: "decomposition on all small graphs", budget: s(120), check: decomposition },
        Criterion { id: 8, name: "counting bound", budget: s(120), check: counting_bound },
        Criterion { id: 9, name: "trace oracle", budget: s(300), check: trace_oracle },
        Criterion { id: 10, name: "triangle probability excess", budget: s(300), check: subgraphs },
        Criterion { id: 11, name: "second eigenvalue scaling", budget: s(900), check: second_eigenvalue },
        Criterion { id: 12, name: "rank-one perturbation of the ESD", budget: s(30), check: rank_inequality },
    ]
}

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for c in criteria() {
        if !wanted.is_empty() && !wanted.contains(&c.id) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) => (elapsed <= c.budget, d),
            Err(d) => (false, d),
        };
        let over = if elapsed > c.budget { format!(" (over budget {:?})", c.budget) } else { String::new() };
        println!(
            "[{}] criterion {:2}: {} : {detail} [{:.1}s{over}]",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
