use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use groupcf::experiment::{
    explain_once, load_dataset, run_experiment, DatasetKind, ExperimentConfig, ExplainStatus,
};
use groupcf::search::trace_to_jsonl;
use groupcf::synth::{generate_synthetic, write_movielens};
use groupcf::{Dataset, Method};

#[derive(Parser)]
#[command(
    name = "groupcf",
    version,
    about = "Counterfactual explanations for group recommendations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the benchmark grid and write per-run CSV plus a summary.
    Bench(BenchArgs),
    /// Explain one group's recommendation.
    Explain(ExplainArgs),
    /// Generate a synthetic ratings file in MovieLens format.
    Synth(SynthArgs),
}

#[derive(Args, Default)]
struct Overrides {
    /// TOML config file; flags override its keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    dataset_kind: Option<Kind>,
    #[arg(long)]
    path: Option<PathBuf>,
    #[arg(long)]
    rating_scale_max: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    group_sizes: Option<Vec<usize>>,
    #[arg(long)]
    groups_per_size: Option<usize>,
    #[arg(long)]
    min_ratings: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    list_length: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long, value_enum)]
    pareto: Option<ParetoMode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k_neighbors: Option<usize>,
    #[arg(long)]
    count_metric_calls_in_budget: bool,
    #[arg(long)]
    utility_weight: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    include_failed: bool,
    /// Test every ExpRebuild prefix instead of skipping subsets.
    #[arg(long)]
    no_rebuild_skip: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Movielens,
    Amazon,
    Synthetic,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParetoMode {
    Off,
    On,
    Both,
}

impl ParetoMode {
    fn modes(self) -> Vec<bool> {
        match self {
            ParetoMode::Off => vec![false],
            ParetoMode::On => vec![true],
            ParetoMode::Both => vec![false, true],
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Per-run CSV output; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Aggregate summary output; stderr when absent.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Group member ids as they appear in the dataset.
    #[arg(long, value_delimiter = ',', required = true)]
    members: Vec<String>,
    /// Item id to explain, or `top1`.
    #[arg(long, default_value = "top1")]
    target: String,
    /// Write each run's call trace as JSON lines into this directory.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    users: usize,
    #[arg(long)]
    items: usize,
    #[arg(long)]
    density: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Rating scale written to the file (normalized ratings are multiplied by it).
    #[arg(long, default_value_t = 5.0)]
    scale: f64,
    #[arg(long, short)]
    out: PathBuf,
}

fn load_config(o: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = match &o.config {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(k) = o.dataset_kind {
        cfg.dataset_kind = match k {
            Kind::Movielens => DatasetKind::Movielens,
            Kind::Amazon => DatasetKind::Amazon,
            Kind::Synthetic => DatasetKind::Synthetic,
        };
    }
    if let Some(p) = &o.path {
        cfg.path = Some(p.clone());
    }
    macro_rules! set {
        ($($field:ident),*) => {$(
            if let Some(v) = o.$field.clone() {
                cfg.$field = v;
            }
        )*};
    }
    set!(
        rating_scale_max,
        group_sizes,
        groups_per_size,
        min_ratings,
        budget,
        list_length,
        window,
        methods,
        seed,
        k_neighbors,
        utility_weight
    );
    if let Some(p) = o.pareto {
        cfg.pareto_filter = p.modes();
    }
    if o.workers.is_some() {
        cfg.workers = o.workers;
    }
    cfg.count_metric_calls_in_budget |= o.count_metric_calls_in_budget;
    cfg.include_failed |= o.include_failed;
    if o.no_rebuild_skip {
        cfg.rebuild_skip_subsets = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let ds = load_dataset(cfg).with_context(|| match &cfg.path {
        Some(p) => format!(
            "loading {} dataset from {}",
            cfg.dataset_kind.name(),
            p.display()
        ),
        None => "generating synthetic dataset".to_owned(),
    })?;
    log::info!("{}", ds.stats_line());
    Ok(ds)
}

fn write_or(path: Option<&Path>, text: &str, fallback: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => fallback.write_all(text.as_bytes()).map_err(Into::into),
    }
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    let cfg = load_config(&args.overrides)?;
    let ds = dataset(&cfg)?;
    let result = run_experiment(&ds, &cfg, cfg.dataset_kind.name())?;
    write_or(
        args.out.as_deref(),
        &result.csv_string(),
        &mut std::io::stdout(),
    )?;
    write_or(
        args.summary.as_deref(),
        &result.summary_text(),
        &mut std::io::stderr(),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn explain(args: ExplainArgs) -> Result<ExitCode> {
    let cfg = load_config(&args.overrides)?;
    let ds = dataset(&cfg)?;
    let target = (args.target != "top1").then_some(args.target.as_str());
    let outcome = explain_once(&ds, &cfg, &args.members, target, &cfg.method_grid())?;
    print!("{}", outcome.render(&ds));
    if let Some(dir) = &args.trace_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for r in &outcome.runs {
            let name = format!(
                "{}_{}.jsonl",
                r.method,
                if r.pareto { "pareto" } else { "sorted" }
            );
            fs::write(dir.join(&name), trace_to_jsonl(&r.trace))
                .with_context(|| format!("writing trace {name}"))?;
        }
    }
    Ok(match outcome.status {
        ExplainStatus::Explained => ExitCode::SUCCESS,
        ExplainStatus::NoExplanation => ExitCode::from(1),
        ExplainStatus::NothingToExplain => ExitCode::from(2),
    })
}

fn synth(args: SynthArgs) -> Result<ExitCode> {
    if args.scale.is_nan() || args.scale <= 0.0 {
        bail!("scale must be positive");
    }
    let ds: Dataset = generate_synthetic(args.users, args.items, args.density, args.seed)?;
    write_movielens(&ds, &args.out, args.scale)?;
    eprintln!("{} -> {}", ds.stats_line(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Bench(a) => bench(a),
        Command::Explain(a) => explain(a),
        Command::Synth(a) => synth(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
