//! Command-line entry points for the habitat simulator.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use habsim_core::scenario::{run_scenario_with, ScenarioConfig};
use habsim_resilience::{extract_metrics, run_batch};

use output::{
    dump_config, parse_grid_csv, write_batch_summary, write_grid, write_report, write_run_summary,
    write_timeseries, BatchSummary, RunSummary,
};

#[derive(Parser)]
#[command(
    name = "habsim",
    about = "Deterministic lunar-habitat disruption simulator and resilience harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (TOML). Omitted fields take the reference-scenario
    /// defaults; an empty file is the full reference scenario.
    scenario: PathBuf,
    /// Master seed override (falls back to HABSIM_SEED, then the scenario).
    #[arg(long, env = "HABSIM_SEED")]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single scenario and write timeseries.csv plus summary.json.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Pace the run against the wall clock at this multiple of real
        /// time (1.0 = real time). Unpaced when omitted.
        #[arg(long)]
        pace: Option<f64>,
    },
    /// Run the Monte Carlo batch and write grid.csv plus batch_summary.json.
    Batch {
        #[command(flatten)]
        common: CommonArgs,
        /// Worker threads for batch cells. The grid is identical at any
        /// value.
        #[arg(long, default_value_t = 4)]
        jobs: usize,
    },
    /// Derive plot-ready CSVs from a batch results directory.
    Report {
        /// Directory containing grid.csv from a previous batch run.
        results_dir: PathBuf,
        /// Output directory (defaults to the results directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the effective configuration (defaults applied) as TOML.
    Dump { scenario: PathBuf },
}

fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading scenario {}", path.display()))?;
    let config: ScenarioConfig =
        toml::from_str(&text).with_context(|| format!("parsing scenario {}", path.display()))?;
    config
        .validate()
        .with_context(|| format!("validating scenario {}", path.display()))?;
    Ok(config)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn cmd_run(common: &CommonArgs, pace: Option<f64>) -> Result<()> {
    let config = load_scenario(&common.scenario)?;
    ensure_dir(&common.out)?;
    let start = Instant::now();
    let pacer = pace.filter(|f| *f > 0.0);
    let result = run_scenario_with(&config, common.seed, |now| {
        if let Some(factor) = pacer {
            let target = Duration::from_secs_f64(now / factor);
            let elapsed = start.elapsed();
            if target > elapsed {
                std::thread::sleep(target - elapsed);
            }
        }
    })?;
    let metrics = extract_metrics(&result, config.batch.t_crit_k, config.power.baseline_load_w)?;
    let rows = write_timeseries(&result, &common.out.join("timeseries.csv"))?;
    write_run_summary(
        &RunSummary {
            seed: result.seed,
            end_time_s: result.end_time,
            rows,
            metrics: &metrics,
        },
        &common.out.join("summary.json"),
    )?;
    println!(
        "run complete: {} rows, margin {:.3}, wall {:.2?}",
        rows,
        metrics.response_margin,
        start.elapsed()
    );
    Ok(())
}

fn cmd_batch(common: &CommonArgs, jobs: usize) -> Result<()> {
    let config = load_scenario(&common.scenario)?;
    ensure_dir(&common.out)?;
    let master_seed = common.seed.unwrap_or(config.seed);
    let start = Instant::now();
    let grid = run_batch(&config, master_seed, jobs)?;
    let cells = write_grid(&grid, &common.out.join("grid.csv"))?;
    let summary = BatchSummary::from_grid(&grid, master_seed);
    write_batch_summary(&summary, &common.out.join("batch_summary.json"))?;
    println!(
        "batch complete: {} cells ({} failures, {} errors), wall {:.2?}",
        cells,
        summary.failures,
        summary.cell_errors,
        start.elapsed()
    );
    Ok(())
}

fn cmd_report(results_dir: &Path, out: Option<PathBuf>) -> Result<()> {
    let grid_path = results_dir.join("grid.csv");
    let text = fs::read_to_string(&grid_path)
        .with_context(|| format!("reading {}", grid_path.display()))?;
    let rows = parse_grid_csv(&text)?;
    let out_dir = out.unwrap_or_else(|| results_dir.to_path_buf());
    ensure_dir(&out_dir)?;
    let written = write_report(&rows, &out_dir)?;
    println!("report complete: {}", written.join(", "));
    Ok(())
}

fn cmd_dump(scenario: &Path) -> Result<()> {
    let config = load_scenario(scenario)?;
    print!("{}", dump_config(&config)?);
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { common, pace } => cmd_run(common, *pace),
        Command::Batch { common, jobs } => cmd_batch(common, *jobs),
        Command::Report { results_dir, out } => cmd_report(results_dir, out.clone()),
        Command::Dump { scenario } => cmd_dump(scenario),
    };
    if let Err(error) = outcome {
        eprintln!("error: {error:#}");
        std::process::exit(1);
    }
}
