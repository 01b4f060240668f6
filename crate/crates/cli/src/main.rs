use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use horserace::config::{parse_window_grid, RunConfig};
use horserace::evaluation::run_horse_race;
use horserace::ingest::{ingest_panel, panel_to_csv, preprocess};
use horserace::report::{emit_report, load_report, RunManifest};
use horserace::sim::{simulate_panel, SimSpec};
use tracing::{info, warn};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "horserace", version, about = "Rolling-origin forecast horse race against the random walk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest and preprocess the inputs without running anything.
    Validate(RunArgs),
    /// Run the full horse race and write the report files.
    Run(RunArgs),
    /// Write a synthetic target and covariate file pair.
    Simulate(SimArgs),
    /// Re-emit the report files from a saved report.
    Report {
        /// Directory holding report.json and run_manifest.json.
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target CSV (`date,value`); overrides the configuration.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Wide covariate CSV; overrides the configuration.
    #[arg(long)]
    covariates: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "horserace-out")]
    out: PathBuf,
    /// Window grid as `start:end:step` or a comma-separated list.
    #[arg(long)]
    windows: Option<String>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct SimArgs {
    /// TOML simulation spec; flags override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// Number of pure-noise covariates.
    #[arg(long)]
    noise: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Input(anyhow::Error),
    SkipBudget(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<horserace::Error> for Failure {
    fn from(e: horserace::Error) -> Self {
        Failure::Input(e.into())
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(args) => validate(&args),
        Command::Run(args) => run(&args),
        Command::Simulate(args) => simulate(&args),
        Command::Report { from, out } => rereport(&from, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::SkipBudget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_config(args: &RunArgs) -> anyhow::Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut c = RunConfig::from_toml_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            let base = path.parent().unwrap_or(Path::new("."));
            c.target_path = c.target_path.map(|p| base.join(p));
            c.covariates_path = c.covariates_path.map(|p| base.join(p));
            c
        }
        None => RunConfig::default(),
    };
    if let Some(p) = &args.target {
        config.target_path = Some(p.clone());
    }
    if let Some(p) = &args.covariates {
        config.covariates_path = Some(p.clone());
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(w) = &args.windows {
        config.window_grid = parse_window_grid(w)?;
    }
    Ok(config)
}

struct Prepared {
    config: RunConfig,
    panel: horserace::Panel,
    manifest_parts: (horserace::ingest::IngestLog, horserace::ingest::PreprocessLog),
}

fn prepare(args: &RunArgs) -> anyhow::Result<Prepared> {
    let config = load_config(args)?;
    let (Some(target), Some(covs)) = (&config.target_path, &config.covariates_path) else {
        bail!("both a target and a covariate file are required (--target/--covariates or the config file)");
    };
    let (panel, ingest_log) = ingest_panel(target, covs)?;
    let (panel, pre_log) = preprocess(&panel, &config)?;
    config.validate(panel.len())?;
    Ok(Prepared { config, panel, manifest_parts: (ingest_log, pre_log) })
}

fn validate(args: &RunArgs) -> Result<(), Failure> {
    let p = prepare(args)?;
    let (ingest_log, pre_log) = &p.manifest_parts;
    println!("T = {}, covariates = {}", p.panel.len(), p.panel.covariate_names().join(","));
    println!(
        "dropped dates: {} target, {} covariates",
        ingest_log.dropped_target_dates.len(),
        ingest_log.dropped_covariate_dates.len()
    );
    for action in &pre_log.actions {
        println!("{action}");
    }
    println!("window grid: {} lengths, {}..={}", p.config.window_grid.len(), p.config.window_grid[0], p.config.window_grid[p.config.window_grid.len() - 1]);
    Ok(())
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let p = prepare(args)?;
    let race = p.config.race_config();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        pool = pool.num_threads(jobs.max(1));
    }
    let pool = pool.build().context("building the worker pool")?;
    info!(t = p.panel.len(), splits = race.window_grid.len(), "running horse race");
    let report = pool.install(|| run_horse_race(&p.panel, &race))?;
    let (ingest_log, pre_log) = p.manifest_parts;
    let manifest = RunManifest::new(&p.config, p.panel.target().name(), &report, Some(ingest_log), pre_log);
    let written = emit_report(&report, &manifest, &args.out)?;
    println!("wrote {} files to {}", written.len(), args.out.display());
    let rate = report.skip_rate();
    if rate > p.config.skip_budget {
        warn!(rate, budget = p.config.skip_budget, "skip budget exceeded");
        return Err(Failure::SkipBudget(format!(
            "{:.2}% of windows skipped, above the budget of {:.2}%",
            100.0 * rate,
            100.0 * p.config.skip_budget
        )));
    }
    Ok(())
}

fn simulate(args: &SimArgs) -> Result<(), Failure> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<SimSpec>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => SimSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(t) = args.t {
        spec.t = t;
    }
    if let Some(beta) = args.beta {
        spec.beta = beta;
    }
    if let Some(n) = args.noise {
        spec.n_noise = n;
    }
    let panel = simulate_panel(&spec)?;
    let (target, covs) = panel_to_csv(&panel);
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    fs::write(args.out.join("target.csv"), target).context("writing target.csv")?;
    fs::write(args.out.join("covariates.csv"), covs).context("writing covariates.csv")?;
    let spec_text = toml::to_string(&spec).context("serializing the simulation settings")?;
    fs::write(args.out.join("sim_spec.toml"), spec_text).context("writing sim_spec.toml")?;
    println!("wrote a panel of {} days to {}", panel.len(), args.out.display());
    Ok(())
}

fn rereport(from: &Path, out: &Path) -> Result<(), Failure> {
    let (report, manifest) = load_report(from).with_context(|| format!("loading the report in {}", from.display()))?;
    let written = emit_report(&report, &manifest, out)?;
    println!("wrote {} files to {}", written.len(), out.display());
    Ok(())
}
