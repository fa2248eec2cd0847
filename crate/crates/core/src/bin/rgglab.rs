use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use rgglab::lab::{run, Experiment, ExperimentConfig};

/// Experiments on random geometric graphs on the sphere: spectra, walk
/// expansions, subgraph probabilities and graph decompositions.
#[derive(Parser)]
#[command(name = "rgglab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Empirical spectral distribution against the semicircle (or nu_alpha with --alpha)
    Lsd(Common),
    /// Trial-averaged spectral moments against their limits
    Moments(Common),
    /// Second eigenvalue over a sweep of n with d = d_factor * n * p
    SecondEig(Common),
    /// Monte Carlo cycle and pinned-path probabilities
    SubgraphProb(Common),
    /// Histogram TV of the cap random walk after 1..k steps
    CapMixing(Common),
    /// Block-cut tree, ear decompositions and walk-graph statistics
    Decomp(Common),
    /// Brute-force trace expansion against the spectral trace
    Oracle(Common),
    /// Sample one graph and write it as an edge list
    Sample(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorArg {
    Geometric,
    ErdosRenyi,
}

#[derive(Args)]
struct Common {
    /// JSON config; fields not given take the experiment's preset
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (runs are written to OUT/{run_id}/)
    #[arg(long, env = "RGGLAB_OUT")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, env = "RGGLAB_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Expected degree; selects the sparse regime with p = alpha / n
    #[arg(long)]
    alpha: Option<f64>,
    /// Walk length (oracle) or cap-walk steps (cap-mixing)
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    k_max: Option<u32>,
    #[arg(long, value_enum)]
    generator: Option<GeneratorArg>,
    /// Edge-list file for decomp
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Closed walk for decomp as comma-separated vertices; repeatable
    #[arg(long = "walk")]
    walks: Vec<String>,
}

impl Command {
    fn parts(&self) -> (Experiment, &Common) {
        match self {
            Command::Lsd(c) => (Experiment::Lsd, c),
            Command::Moments(c) => (Experiment::Moments, c),
            Command::SecondEig(c) => (Experiment::SecondEigSweep, c),
            Command::SubgraphProb(c) => (Experiment::SubgraphProb, c),
            Command::CapMixing(c) => (Experiment::CapMixing, c),
            Command::Decomp(c) => (Experiment::Decomp, c),
            Command::Oracle(c) => (Experiment::Oracle, c),
            Command::Sample(c) => (Experiment::Sample, c),
        }
    }
}

fn parse_walk(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad walk {s:?}: {e}")))
        .collect()
}

fn build_config(experiment: Experiment, c: &Common) -> Result<ExperimentConfig, String> {
    let mut fields = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            match serde_json::from_str::<Value>(&text).map_err(|e| format!("{}: {e}", path.display()))? {
                Value::Object(m) => m,
                _ => return Err(format!("{}: config must be a JSON object", path.display())),
            }
        }
        None => Map::new(),
    };
    let mut set = |key: &str, v: Option<Value>| {
        if let Some(v) = v {
            fields.insert(key.into(), v);
        }
    };
    set("seed", c.seed.map(|x| json!(x)));
    set("trials", c.trials.map(|x| json!(x)));
    set("n", c.n.map(|x| json!(x)));
    set("d", c.d.map(|x| json!(x)));
    set("p", c.p.map(|x| json!(x)));
    set("alpha", c.alpha.map(|x| json!(x)));
    set("k", c.k.map(|x| json!(x)));
    set("k_max", c.k_max.map(|x| json!(x)));
    set("graph_file", c.graph.as_ref().map(|x| json!(x)));
    set("output_dir", c.out.as_ref().map(|x| json!(x)));
    set(
        "generator",
        c.generator.map(|g| match g {
            GeneratorArg::Geometric => json!("geometric"),
            GeneratorArg::ErdosRenyi => json!("erdos_renyi"),
        }),
    );
    if !c.walks.is_empty() {
        let walks = c.walks.iter().map(|w| parse_walk(w)).collect::<Result<Vec<_>, _>>()?;
        fields.insert("walks".into(), json!(walks));
    }
    // an explicit --p on the command line wins over a config-file alpha and vice versa
    if c.p.is_some() && c.alpha.is_none() {
        fields.insert("alpha".into(), Value::Null);
    }
    if c.alpha.is_some() && c.p.is_none() {
        fields.insert("p".into(), Value::Null);
    }
    ExperimentConfig::from_overrides(experiment, Some(Value::Object(fields))).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = cli.command.parts();
    let cfg = match build_config(experiment, common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = common.threads {
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    };
    let output = match pool.install(|| run(&cfg)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let base = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("runs"));
    let dir = match output.persist(&base) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let report = &output.report;
    println!("{} run {} -> {}", experiment.name(), report.run_id, dir.display());
    for c in &report.comparisons {
        let status = if c.pass { "PASS" } else { "FAIL" };
        let range = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into());
        println!("  [{status}] {} = {:.6} in [{}, {}]", c.name, c.observed, range(c.lower), range(c.upper));
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
