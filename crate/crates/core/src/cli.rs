//! The `polis` command-line tool.
//!
//! Every numeric setting resolves as: command-line flag, else the JSON
//! config file given with `--config`, else the built-in default (see
//! `polis --show-defaults`).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::economy::{self, EconomyMap, MarketParams, PolicyBounds, TaxPolicy};
use crate::error::{Error, Result};
use crate::estimator::{self, Estimator};
use crate::evolution::{self, SimConfig};
use crate::metaheuristics::{
    self, AnnealerConfig, NeighborhoodSpec, OptimizerRun, OptimizerSpec, SearchConfig,
};
use crate::stats::{self, StatsReport};

pub const THREADS_ENV: &str = "POLIS_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "polis",
    version,
    about = "Tax-policy search on a spatial market-selection economy"
)]
pub struct Cli {
    /// Print every built-in default and exit.
    #[arg(long)]
    pub show_defaults: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Place firms and markets at random on the grid.
    GenMap(GenMapArgs),
    /// Run one simulation and export its trace.
    Simulate(SimulateArgs),
    /// Estimate the expected objective of a policy by repeated simulation.
    Estimate(EstimateArgs),
    /// Search for a policy with simulated annealing or local search.
    Optimize(OptimizeArgs),
    /// Summaries, confidence intervals and a one-sided test over value files.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct GenMapArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub firms: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub markets: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub grid: Option<u32>,
    #[arg(short, long, default_value = "map.json")]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Simulation settings shared by every command that runs the economy.
#[derive(Debug, Args, Default)]
pub struct SimArgs {
    /// Economy map JSON written by `gen-map`.
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub warmup: Option<usize>,
    #[arg(long)]
    pub neighbors: Option<usize>,
    #[arg(long)]
    pub mimic_prob: Option<f64>,
    #[arg(long)]
    pub mutate_prob: Option<f64>,
    #[arg(long)]
    pub intercept: Option<f64>,
    #[arg(long)]
    pub slope: Option<f64>,
    #[arg(long)]
    pub transport: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct PolicyArgs {
    /// Policy JSON `{"rate": [...], "fixed": [...]}`.
    #[arg(long, conflicts_with_all = ["rates", "fixed"])]
    pub policy: Option<PathBuf>,
    /// Comma-separated per-market rate coefficients.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub rates: Option<Vec<f64>>,
    /// Comma-separated per-market fixed amounts.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub fixed: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// Output directory for `trace.csv` and `summary.json`.
    #[arg(short, long, default_value = ".")]
    pub out: PathBuf,
    /// Also write `mean_profit.csv`, the per-step mean profit series.
    #[arg(long)]
    pub plot_data: bool,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[arg(long)]
    pub n_sim: Option<usize>,
    #[arg(long)]
    pub confidence: Option<f64>,
    /// Run replicates on the thread pool. Results are identical either way.
    #[arg(long)]
    pub parallel: bool,
    /// Write the estimate JSON here as well as to stdout.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerKind {
    Sa,
    Sls,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    pub kind: OptimizerKind,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Starting policy; defaults to no taxes.
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[arg(long)]
    pub n_sim: Option<usize>,
    /// Independent optimizer executions.
    #[arg(long)]
    pub executions: Option<usize>,
    #[arg(long)]
    pub parallel: bool,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub inner_iters: Option<usize>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Annealing evaluation cap; 0 removes the cap.
    #[arg(long)]
    pub max_evals: Option<usize>,
    #[arg(long)]
    pub reestimate: bool,
    /// Local-search iterations after the initial evaluation.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub rate_radius: Option<f64>,
    #[arg(long)]
    pub fixed_radius: Option<f64>,
    #[arg(short, long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// One or two value files (one number per line).
    #[arg(num_args = 1..=2, required = true)]
    pub files: Vec<PathBuf>,
    /// Read this named column of CSV files instead of plain lines.
    #[arg(long)]
    pub column: Option<String>,
    /// Interval levels [default: 0.95,0.98].
    #[arg(long, value_delimiter = ',')]
    pub confidence: Option<Vec<f64>>,
    /// Significance level for the one-sided test decision [default: 0.05].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Write the report as JSON here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Also write the text table here.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Optional settings read from `--config`. Field names follow the library
/// types.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub firms: Option<usize>,
    pub markets: Option<usize>,
    pub grid_size: Option<u32>,
    pub steps: Option<usize>,
    pub warmup: Option<usize>,
    pub neighbor_count: Option<usize>,
    pub mimic_prob: Option<f64>,
    pub mutate_prob: Option<f64>,
    pub intercept: Option<f64>,
    pub slope: Option<f64>,
    pub transport_rate: Option<f64>,
    pub n_sim: Option<usize>,
    pub confidence: Option<f64>,
    pub executions: Option<usize>,
    pub t0: Option<f64>,
    pub alpha: Option<f64>,
    pub inner_iters: Option<usize>,
    pub t_final: Option<f64>,
    pub max_evaluations: Option<usize>,
    pub iterations: Option<usize>,
    pub rate_radius: Option<f64>,
    pub fixed_radius: Option<f64>,
    pub rate_bounds: Option<(f64, f64)>,
    pub fixed_bounds: Option<(f64, f64)>,
    /// `stats` interval levels.
    pub confidence_levels: Option<Vec<f64>>,
    /// `stats` test significance level.
    pub significance: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    fn bounds(&self) -> PolicyBounds {
        let d = PolicyBounds::default();
        PolicyBounds {
            rate: self.rate_bounds.unwrap_or(d.rate),
            fixed: self.fixed_bounds.unwrap_or(d.fixed),
        }
    }
}

pub fn defaults_table() -> String {
    let rows: Vec<(&str, String)> = vec![
        ("firms", economy::DEFAULT_FIRMS.to_string()),
        ("markets", economy::DEFAULT_MARKETS.to_string()),
        ("grid_size", economy::DEFAULT_GRID_SIZE.to_string()),
        ("intercept", economy::DEFAULT_INTERCEPT.to_string()),
        ("slope", economy::DEFAULT_SLOPE.to_string()),
        (
            "transport_rate",
            economy::DEFAULT_TRANSPORT_RATE.to_string(),
        ),
        ("steps", evolution::DEFAULT_STEPS.to_string()),
        ("warmup", evolution::DEFAULT_WARMUP.to_string()),
        ("neighbor_count", evolution::DEFAULT_NEIGHBORS.to_string()),
        ("mimic_prob", evolution::DEFAULT_MIMIC_PROB.to_string()),
        ("mutate_prob", evolution::DEFAULT_MUTATE_PROB.to_string()),
        ("rate_bounds", format!("{:?}", economy::DEFAULT_RATE_BOUNDS)),
        (
            "fixed_bounds",
            format!("{:?}", economy::DEFAULT_FIXED_BOUNDS),
        ),
        (
            "rate_radius",
            metaheuristics::DEFAULT_RATE_RADIUS.to_string(),
        ),
        (
            "fixed_radius",
            metaheuristics::DEFAULT_FIXED_RADIUS.to_string(),
        ),
        ("n_sim", estimator::PAPER_N_SIM.to_string()),
        ("confidence", estimator::DEFAULT_CONFIDENCE.to_string()),
        ("t0", metaheuristics::DEFAULT_T0.to_string()),
        ("alpha", metaheuristics::DEFAULT_ALPHA.to_string()),
        (
            "inner_iters",
            metaheuristics::DEFAULT_INNER_ITERS.to_string(),
        ),
        ("t_final", metaheuristics::DEFAULT_T_FINAL.to_string()),
        (
            "max_evaluations",
            metaheuristics::DEFAULT_MAX_EVALUATIONS.to_string(),
        ),
        (
            "iterations",
            metaheuristics::DEFAULT_SEARCH_ITERATIONS.to_string(),
        ),
        ("executions", "1".to_string()),
        (
            "confidence_levels",
            stats::DEFAULT_CONFIDENCES.map(|c| c.to_string()).join(","),
        ),
        ("significance", stats::DEFAULT_SIGNIFICANCE.to_string()),
        ("seed", "0".to_string()),
    ];
    let w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<w$}  {v}\n"))
        .collect()
}

fn create_file(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = create_file(path)?;
    f.write_all(text.as_bytes())
        .and_then(|_| f.flush())
        .map_err(|e| Error::io(path, e))
}

fn write_csv_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>,
) -> Result<()> {
    let mut f = create_file(path)?;
    body(&mut f)?;
    f.flush().map_err(|e| Error::io(path, e))
}

struct Resolved {
    map: EconomyMap,
    config: SimConfig,
    file: FileConfig,
}

fn resolve_sim(args: &SimArgs) -> Result<Resolved> {
    let file = FileConfig::load(args.config.as_deref())?;
    let map = EconomyMap::load(&args.map)?;
    let m = map.n_markets();
    let params = MarketParams::uniform(
        m,
        args.intercept
            .or(file.intercept)
            .unwrap_or(economy::DEFAULT_INTERCEPT),
        args.slope.or(file.slope).unwrap_or(economy::DEFAULT_SLOPE),
        args.transport
            .or(file.transport_rate)
            .unwrap_or(economy::DEFAULT_TRANSPORT_RATE),
    );
    let config = SimConfig {
        steps: args
            .steps
            .or(file.steps)
            .unwrap_or(evolution::DEFAULT_STEPS),
        warmup: args
            .warmup
            .or(file.warmup)
            .unwrap_or(evolution::DEFAULT_WARMUP),
        neighbor_count: args
            .neighbors
            .or(file.neighbor_count)
            .unwrap_or(evolution::DEFAULT_NEIGHBORS),
        mimic_prob: args
            .mimic_prob
            .or(file.mimic_prob)
            .unwrap_or(evolution::DEFAULT_MIMIC_PROB),
        mutate_prob: args
            .mutate_prob
            .or(file.mutate_prob)
            .unwrap_or(evolution::DEFAULT_MUTATE_PROB),
        market_params: params,
        seed: args.seed.or(file.seed).unwrap_or(0),
    };
    config.validate(map.n_firms(), m)?;
    Ok(Resolved { map, config, file })
}

fn resolve_policy(args: &PolicyArgs, n_markets: usize, bounds: &PolicyBounds) -> Result<TaxPolicy> {
    let policy = match (&args.policy, &args.rates, &args.fixed) {
        (Some(path), _, _) => TaxPolicy::load(path)?,
        (None, None, None) => TaxPolicy::zero(n_markets),
        (None, rates, fixed) => TaxPolicy::new(
            rates.clone().unwrap_or_else(|| vec![0.0; n_markets]),
            fixed.clone().unwrap_or_else(|| vec![0.0; n_markets]),
        )?,
    };
    policy.validate(n_markets, bounds)?;
    Ok(policy)
}

fn gen_map(args: &GenMapArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let firms = args
        .firms
        .map(|v| v as usize)
        .or(file.firms)
        .unwrap_or(economy::DEFAULT_FIRMS);
    let markets = args
        .markets
        .map(|v| v as usize)
        .or(file.markets)
        .unwrap_or(economy::DEFAULT_MARKETS);
    let grid = args
        .grid
        .or(file.grid_size)
        .unwrap_or(economy::DEFAULT_GRID_SIZE);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let map = economy::generate_map(seed, firms, markets, grid)?;
    write_text(&args.out, &(map.to_json()? + "\n"))?;
    println!("{}", args.out.display());
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub objective: f64,
    pub steps: usize,
    pub warmup: usize,
    pub seed: u64,
    pub n_firms: usize,
    pub n_markets: usize,
    pub policy: TaxPolicy,
    pub final_quantities: Vec<u32>,
    pub final_mean_profit: f64,
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let Resolved { map, config, file } = resolve_sim(&args.sim)?;
    let policy = resolve_policy(&args.policy, map.n_markets(), &file.bounds())?;
    let result = evolution::run_simulation(&map, &policy, &config)?;

    let trace_path = args.out.join("trace.csv");
    write_csv_file(&trace_path, |f| {
        evolution::write_trace_csv(&result.trace, f)
    })?;

    let last = result.trace.last().expect("steps > warmup >= 0");
    let summary = SimulationSummary {
        objective: result.objective,
        steps: config.steps,
        warmup: config.warmup,
        seed: config.seed,
        n_firms: map.n_firms(),
        n_markets: map.n_markets(),
        policy,
        final_quantities: last.quantities.clone(),
        final_mean_profit: last.mean_profit,
    };
    let json = serde_json::to_string_pretty(&summary)?;
    write_text(&args.out.join("summary.json"), &(json.clone() + "\n"))?;

    if args.plot_data {
        let mut text = String::from("t,mean_profit\n");
        for rec in &result.trace {
            text.push_str(&format!("{},{}\n", rec.t, rec.mean_profit));
        }
        write_text(&args.out.join("mean_profit.csv"), &text)?;
    }
    println!("{json}");
    Ok(())
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    let Resolved { map, config, file } = resolve_sim(&args.sim)?;
    let policy = resolve_policy(&args.policy, map.n_markets(), &file.bounds())?;
    let n_sim = args.n_sim.or(file.n_sim).unwrap_or(estimator::PAPER_N_SIM);
    let confidence = args
        .confidence
        .or(file.confidence)
        .unwrap_or(estimator::DEFAULT_CONFIDENCE);
    let seed = config.seed;
    let est = Estimator::new(&map, config, n_sim)?
        .with_parallel(args.parallel)
        .with_confidence(confidence)?
        .estimate(&policy, seed)?;
    let json = est.to_json()? + "\n";
    if let Some(out) = &args.out {
        write_text(out, &json)?;
    }
    print!("{json}");
    Ok(())
}

fn resolve_optimizer(args: &OptimizeArgs, file: &FileConfig) -> Result<OptimizerSpec> {
    let neighborhood = NeighborhoodSpec {
        rate_radius: args
            .rate_radius
            .or(file.rate_radius)
            .unwrap_or(metaheuristics::DEFAULT_RATE_RADIUS),
        fixed_radius: args
            .fixed_radius
            .or(file.fixed_radius)
            .unwrap_or(metaheuristics::DEFAULT_FIXED_RADIUS),
        bounds: file.bounds(),
    };
    let opt = match args.kind {
        OptimizerKind::Sa => {
            let cap = args
                .max_evals
                .or(file.max_evaluations)
                .unwrap_or(metaheuristics::DEFAULT_MAX_EVALUATIONS);
            let cfg = AnnealerConfig {
                t0: args.t0.or(file.t0).unwrap_or(metaheuristics::DEFAULT_T0),
                alpha: args
                    .alpha
                    .or(file.alpha)
                    .unwrap_or(metaheuristics::DEFAULT_ALPHA),
                inner_iters: args
                    .inner_iters
                    .or(file.inner_iters)
                    .unwrap_or(metaheuristics::DEFAULT_INNER_ITERS),
                t_final: args
                    .t_final
                    .or(file.t_final)
                    .unwrap_or(metaheuristics::DEFAULT_T_FINAL),
                max_evaluations: (cap > 0).then_some(cap),
                neighborhood,
                reestimate_current: args.reestimate,
            };
            cfg.validate()?;
            OptimizerSpec::Annealing(cfg)
        }
        OptimizerKind::Sls => {
            let cfg = SearchConfig {
                iterations: args
                    .iterations
                    .or(file.iterations)
                    .unwrap_or(metaheuristics::DEFAULT_SEARCH_ITERATIONS),
                neighborhood,
            };
            cfg.validate()?;
            OptimizerSpec::Search(cfg)
        }
    };
    Ok(opt)
}

fn write_run(dir: &Path, run: &OptimizerRun) -> Result<()> {
    write_csv_file(&dir.join("history.csv"), |f| {
        metaheuristics::write_history_csv(&run.history, f)
    })?;
    let json = serde_json::to_string_pretty(&run.summary())? + "\n";
    write_text(&dir.join("best.json"), &json)
}

fn optimize(args: &OptimizeArgs) -> Result<()> {
    let Resolved { map, config, file } = resolve_sim(&args.sim)?;
    let bounds = file.bounds();
    let initial = resolve_policy(&args.policy, map.n_markets(), &bounds)?;
    let optimizer = resolve_optimizer(args, &file)?;
    let n_sim = args.n_sim.or(file.n_sim).unwrap_or(estimator::PAPER_N_SIM);
    let executions = args.executions.or(file.executions).unwrap_or(1);
    if executions == 0 {
        return Err(Error::InvalidConfig("executions must be at least 1".into()));
    }
    let root = config.seed;
    let est = Estimator::new(&map, config, n_sim)?.with_parallel(args.parallel);

    let results = metaheuristics::run_executions(&est, &initial, &optimizer, executions, root);

    let dir_for = |k: usize| {
        if executions == 1 {
            args.out.clone()
        } else {
            args.out.join(format!("exec_{k:03}"))
        }
    };
    let mut values = String::new();
    let mut failure = None;
    for (k, res) in results.into_iter().enumerate() {
        match res {
            Ok(run) => {
                write_run(&dir_for(k), &run)?;
                values.push_str(&format!("{}\n", run.best_value));
                if executions == 1 {
                    println!("{}", serde_json::to_string_pretty(&run.summary())?);
                }
            }
            Err(fail) => {
                write_run(&dir_for(k), &fail.partial)?;
                failure.get_or_insert(fail.error);
            }
        }
    }
    if let Some(err) = failure {
        return Err(err);
    }
    let values_path = args.out.join("values.txt");
    write_text(&values_path, &values)?;
    if executions > 1 {
        println!("{}", values_path.display());
    }
    Ok(())
}

/// File stems, or `dir/stem` when two stems collide (e.g. two `values.txt`).
fn sample_labels(files: &[PathBuf]) -> Vec<String> {
    let stem = |p: &Path| {
        p.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| p.display().to_string())
    };
    let stems: Vec<String> = files.iter().map(|p| stem(p)).collect();
    if stems.len() == 2 && stems[0] == stems[1] {
        files
            .iter()
            .zip(&stems)
            .map(|(p, s)| match p.parent().and_then(|d| d.file_name()) {
                Some(dir) => format!("{}/{s}", dir.to_string_lossy()),
                None => p.display().to_string(),
            })
            .collect()
    } else {
        stems
    }
}

fn stats_cmd(args: &StatsArgs) -> Result<()> {
    let labels = sample_labels(&args.files);
    let samples = args
        .files
        .iter()
        .zip(labels)
        .map(|(path, label)| {
            let values = match &args.column {
                Some(col) => stats::read_csv_column(path, col)?,
                None => stats::read_values(path)?,
            };
            Ok((label, values))
        })
        .collect::<Result<Vec<_>>>()?;
    let file = FileConfig::load(args.config.as_deref())?;
    let confidence = args
        .confidence
        .clone()
        .or(file.confidence_levels)
        .unwrap_or_else(|| stats::DEFAULT_CONFIDENCES.to_vec());
    let alpha = args
        .alpha
        .or(file.significance)
        .unwrap_or(stats::DEFAULT_SIGNIFICANCE);
    for c in &confidence {
        stats::z_critical(*c)?;
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha {alpha} must lie in (0, 1)"
        )));
    }
    let report = StatsReport::build(&samples, &confidence)?;
    let mut table = report.to_table();
    if let Some(test) = &report.test {
        let verdict = if test.p_value < alpha {
            "reject"
        } else {
            "retain"
        };
        table.push_str(&format!("{verdict} H0 at alpha = {alpha}\n"));
    }
    print!("{table}");
    if let Some(path) = &args.out {
        write_text(path, &table)?;
    }
    if let Some(path) = &args.json {
        write_text(path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidConfig(format!("{THREADS_ENV}={raw:?} is not a positive integer"))
    })?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    if cli.show_defaults {
        print!("{}", defaults_table());
        return Ok(());
    }
    match &cli.command {
        Some(Command::GenMap(a)) => gen_map(a),
        Some(Command::Simulate(a)) => simulate(a),
        Some(Command::Estimate(a)) => estimate(a),
        Some(Command::Optimize(a)) => optimize(a),
        Some(Command::Stats(a)) => stats_cmd(a),
        None => Err(Error::InvalidArgument(
            "no command given; see `polis --help`".into(),
        )),
    }
}

/// Process exit code for a finished command: 0 ok, 2 usage, 1 runtime.
pub fn exit_code(result: &Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) if e.is_usage() => 2,
        Err(_) => 1,
    }
}
