//! Command-line front end: run scenarios, reproduce the full factorial
//! experiment, or print the analytic oracle values.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mobile_am_sim::plant::ApproachKind;
use mobile_am_sim::report;
use mobile_am_sim::scenario::{self, ExperimentConfig, Scenario};
use mobile_am_sim::simkernel::SimTime;

#[derive(Parser)]
#[command(
    name = "mobile-am-sim",
    version,
    about = "Throughput simulator for a manufacturing cell with mobile 3D-printing robots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run selected scenarios and approaches, emitting per-replication rows
    Run(RunArgs),
    /// Run the full benchmark: all builtin scenarios, both approaches,
    /// 20 common-random-number replications each
    Experiment(ExperimentArgs),
    /// Print analytic bottleneck estimates per scenario
    Oracle(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario id, or "all"
    #[arg(long, default_value = "all")]
    scenario: String,

    /// One of: existing, proposed, both (defaults to the config's choice)
    #[arg(long)]
    approach: Option<String>,

    /// Replications per (scenario, approach) cell
    #[arg(long)]
    reps: Option<u32>,

    /// Master random seed
    #[arg(long)]
    seed: Option<u64>,

    /// Simulation horizon in unit time (minutes)
    #[arg(long)]
    horizon: Option<f64>,

    /// Warm-up interval excluded from statistics, in unit time
    #[arg(long)]
    warmup: Option<f64>,

    /// Common random numbers across approaches: on or off
    #[arg(long)]
    crn: Option<String>,

    /// JSON experiment description (flags override its values)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Write per-replication rows to this file
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,

    /// Write a deterministic event trace to this file
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Master random seed
    #[arg(long)]
    seed: Option<u64>,

    /// JSON experiment description (flags override its values)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Write per-replication rows to this file
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,

    /// Write a deterministic event trace to this file
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Scenario id, or "all"
    #[arg(long, default_value = "all")]
    scenario: String,

    /// Monte-Carlo samples for the benchmark-cycle estimate
    #[arg(long, default_value_t = 200_000)]
    samples: u64,

    /// Seed for the Monte-Carlo estimate
    #[arg(long)]
    seed: Option<u64>,

    /// JSON experiment description
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Experiment(args) => run(RunArgs {
            scenario: "all".into(),
            approach: Some("both".into()),
            reps: None,
            seed: args.seed,
            horizon: None,
            warmup: None,
            crn: Some("on".into()),
            config: args.config,
            out: args.out,
            format: args.format,
            trace: args.trace,
        }),
        Command::Oracle(args) => oracle(args),
    }
}

fn load_base(config: &Option<PathBuf>) -> Result<(Vec<Scenario>, ExperimentConfig)> {
    match config {
        Some(path) => Ok(scenario::load_config(path)?),
        None => Ok((scenario::builtin_scenarios(), ExperimentConfig::default())),
    }
}

fn parse_approaches(name: &str) -> Result<Vec<ApproachKind>> {
    match name {
        "existing" => Ok(vec![ApproachKind::Existing]),
        "proposed" => Ok(vec![ApproachKind::Proposed]),
        "both" => Ok(vec![ApproachKind::Existing, ApproachKind::Proposed]),
        other => bail!("unknown approach `{other}` (expected existing, proposed, or both)"),
    }
}

fn select_scenarios(all: Vec<Scenario>, selector: &str) -> Result<Vec<Scenario>> {
    if selector == "all" {
        return Ok(all);
    }
    let id: u32 = selector
        .parse()
        .with_context(|| format!("invalid scenario `{selector}` (expected an id or `all`)"))?;
    let found: Vec<Scenario> = all.into_iter().filter(|s| s.id == id).collect();
    if found.is_empty() {
        bail!("no scenario with id {id}");
    }
    Ok(found)
}

fn run(args: RunArgs) -> Result<()> {
    let (scenarios, mut config) = load_base(&args.config)?;
    if let Some(reps) = args.reps {
        config.replications = reps;
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(horizon) = args.horizon {
        if !(horizon.is_finite() && horizon >= 0.0) {
            bail!("invalid config field `horizon`: must be non-negative, got {horizon}");
        }
        config.horizon = SimTime::new(horizon);
    }
    if let Some(warmup) = args.warmup {
        if !(warmup.is_finite() && warmup >= 0.0) {
            bail!("invalid config field `warmup`: must be non-negative, got {warmup}");
        }
        config.warmup = SimTime::new(warmup);
    }
    if let Some(crn) = &args.crn {
        config.crn = match crn.as_str() {
            "on" => true,
            "off" => false,
            other => bail!("invalid --crn value `{other}` (expected on or off)"),
        };
    }
    if let Some(approach) = &args.approach {
        config.approaches = parse_approaches(approach)?;
    }
    let scenarios = select_scenarios(scenarios, &args.scenario)?;

    let output = report::run_matrix(&scenarios, &config, args.trace.is_some())?;
    let summaries = report::summarize_rows(&output.rows);
    let comparisons = report::compare_rows(&output.rows);

    if let Some(path) = &args.out {
        let text = match args.format.as_str() {
            "csv" => report::render_csv(&output.rows),
            "json" => report::render_json(&output.rows, &summaries, &comparisons),
            other => bail!("unknown format `{other}` (expected csv or json)"),
        };
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    } else if !matches!(args.format.as_str(), "csv" | "json") {
        bail!("unknown format `{}` (expected csv or json)", args.format);
    }
    if let (Some(path), Some(trace)) = (&args.trace, &output.trace) {
        fs::write(path, trace).with_context(|| format!("cannot write {}", path.display()))?;
    }

    print!("{}", report::render_summary_table(&summaries));
    let comparison_table = report::render_comparison_table(&comparisons);
    if !comparison_table.is_empty() {
        println!();
        print!("{comparison_table}");
    }
    Ok(())
}

fn oracle(args: OracleArgs) -> Result<()> {
    let (scenarios, mut config) = load_base(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    let scenarios = select_scenarios(scenarios, &args.scenario)?;
    let table = report::render_oracle_table(&scenarios, &config, args.samples)?;
    print!("{table}");
    Ok(())
}
