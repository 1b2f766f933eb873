//! `rmbid` — bid-price experiments from the command line.
//!
//! Exit codes: 0 on success, 1 on configuration or input errors, 2 when an
//! experiment finishes but one or more scenarios failed.

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use rmbid_core::demand::DemandScenario;
use rmbid_core::dp::compute_bid_matrix;
use rmbid_core::emsr::{emsr_curve, NormalDemandClass};
use rmbid_core::estimator::{fit, fit_simple_average};
use rmbid_core::experiment::{
    read_results_csv, run_baseline, run_robustness, summarize, write_results_csv,
    write_summary_csv, BaselineConfig, ExperimentRun, GroupBy, RobustnessConfig, DP_TIME_STEP,
};
use rmbid_core::observations::{
    assemble_training_set, build_dcp_grid, read_bookings_csv, read_observations_csv,
    write_observations_csv,
};

use config::ConfigOverlay;

#[derive(Parser)]
#[command(name = "rmbid", version, about = "Bid-price generation and benchmarking toolkit")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML file overriding preset fields (same key names as the configs).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for all output files (created if missing).
    #[arg(long, global = true, default_value = "out", value_name = "PATH")]
    out_dir: PathBuf,

    /// Start from the full-size experiment preset instead of the desk preset.
    #[arg(long, global = true)]
    paper_scale: bool,

    /// Worker threads for scenario/flight parallelism (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the baseline experiment: optimal vs data-driven on shared streams.
    SimulateBaseline {
        /// Skip per-scenario observation and bid-price artifacts.
        #[arg(long)]
        no_artifacts: bool,
    },
    /// Run the demand-shift experiment: optimal vs data-driven vs stale DP.
    SimulateRobustness {
        /// Skip per-scenario observation and bid-price artifacts.
        #[arg(long)]
        no_artifacts: bool,
    },
    /// Turn a bookings CSV into a training-observation CSV.
    BuildObservations {
        /// CSV with columns flight_id,days_to_departure,price[,quantity].
        bookings: PathBuf,
    },
    /// Fit an estimator on a training-observation CSV and save the model.
    Train {
        /// CSV produced by build-observations.
        observations: PathBuf,
        /// Fit per-cell averages instead of the neural network.
        #[arg(long)]
        simple_average: bool,
    },
    /// Solve the dynamic program and write the optimal bid-price matrix.
    DpSolve {
        /// Arrival rate per day.
        #[arg(long)]
        lambda: f64,
        /// Solver time step in days.
        #[arg(long, default_value_t = DP_TIME_STEP)]
        dt: f64,
    },
    /// Write an expected-marginal-seat-revenue curve for one fare class.
    EmsrCurve {
        #[arg(long, default_value_t = 400.0)]
        fare: f64,
        #[arg(long, default_value_t = 3.0)]
        mean: f64,
        #[arg(long, default_value_t = 2.0)]
        std_dev: f64,
        #[arg(long, default_value_t = 10)]
        capacity: u32,
    },
    /// Aggregate a results CSV into grouped gap statistics.
    Summarize {
        /// results.csv from simulate-baseline or simulate-robustness.
        results: PathBuf,
        #[arg(long, value_enum, default_value_t = GroupKey::Lambda)]
        group_by: GroupKey,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupKey {
    /// Bucket scenarios by evaluation arrival rate.
    Lambda,
    /// Bucket scenarios by the test/train rate ratio.
    Ratio,
}

impl From<GroupKey> for GroupBy {
    fn from(key: GroupKey) -> GroupBy {
        match key {
            GroupKey::Lambda => GroupBy::Lambda,
            GroupKey::Ratio => GroupBy::Ratio,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(failed_scenarios) if failed_scenarios > 0 => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Returns the number of failed scenarios (0 for non-experiment commands).
fn run(cli: Cli) -> Result<usize> {
    configure_workers(cli.common.workers)?;
    fs::create_dir_all(&cli.common.out_dir)
        .with_context(|| format!("creating output directory {}", cli.common.out_dir.display()))?;
    let overlay = match &cli.common.config {
        Some(path) => ConfigOverlay::from_path(path)?,
        None => ConfigOverlay::default(),
    };

    match cli.command {
        Command::SimulateBaseline { no_artifacts } => {
            let mut config = if cli.common.paper_scale {
                BaselineConfig::paper_scale()
            } else {
                BaselineConfig::desk()
            };
            overlay.apply_to_baseline(&mut config)?;
            if let Some(seed) = cli.common.seed {
                config.master_seed = seed;
            }
            config.validate()?;
            let artifacts = artifact_dir(&cli.common.out_dir, no_artifacts);
            let run = run_baseline(&config, artifacts.as_deref())?;
            write_experiment_outputs(&cli.common.out_dir, &run, GroupBy::Lambda)?;
            report_failures(&run);
            Ok(run.failures.len())
        }
        Command::SimulateRobustness { no_artifacts } => {
            let mut config = if cli.common.paper_scale {
                RobustnessConfig::paper_scale()
            } else {
                RobustnessConfig::desk()
            };
            overlay.apply_to_robustness(&mut config)?;
            if let Some(seed) = cli.common.seed {
                config.master_seed = seed;
            }
            config.validate()?;
            let artifacts = artifact_dir(&cli.common.out_dir, no_artifacts);
            let run = run_robustness(&config, artifacts.as_deref())?;
            write_experiment_outputs(&cli.common.out_dir, &run, GroupBy::Ratio)?;
            report_failures(&run);
            Ok(run.failures.len())
        }
        Command::BuildObservations { bookings } => {
            let config = baseline_for_tools(&cli.common, &overlay)?;
            let flights = read_bookings_csv(&bookings)?;
            let grid = build_dcp_grid(config.horizon_days, config.n_dcps)?;
            let set = assemble_training_set(&flights, config.capacity, &grid)?;
            let path = cli.common.out_dir.join("observations.csv");
            write_observations_csv(&set, &path)?;
            println!(
                "{} flights -> {} observations at {} checkpoints -> {}",
                set.n_flights(),
                set.rows().len(),
                set.grid().len(),
                path.display()
            );
            Ok(0)
        }
        Command::Train { observations, simple_average } => {
            let mut config = baseline_for_tools(&cli.common, &overlay)?;
            if let Some(seed) = cli.common.seed {
                config.estimator.seed = seed;
            }
            let set = read_observations_csv(&observations)?;
            let model = if simple_average {
                fit_simple_average(&set)?
            } else {
                fit(&set, &config.estimator)?
            };
            let model_path = cli.common.out_dir.join("model.json");
            model.save(&model_path)?;
            let horizon = config.horizon_days.max(set.grid().days()[0] + 1);
            let matrix = model.expand_to_daily(set.capacity(), horizon, set.grid())?;
            let matrix_path = cli.common.out_dir.join("bidprices_data_driven.csv");
            matrix.save(&matrix_path)?;
            println!("model -> {}", model_path.display());
            println!("bid prices -> {}", matrix_path.display());
            Ok(0)
        }
        Command::DpSolve { lambda, dt } => {
            let config = baseline_for_tools(&cli.common, &overlay)?;
            let scenario = DemandScenario::new(
                lambda,
                config.alpha,
                config.p0,
                config.capacity,
                config.horizon_days,
            )?;
            let matrix = compute_bid_matrix(&scenario, dt)?;
            let path = cli.common.out_dir.join("bidprices_dp_optimal.csv");
            matrix.save(&path)?;
            println!("bid prices -> {}", path.display());
            Ok(0)
        }
        Command::EmsrCurve { fare, mean, std_dev, capacity } => {
            let class = NormalDemandClass::new(fare, mean, std_dev)?;
            let curve = emsr_curve(&class, capacity)?;
            let path = cli.common.out_dir.join("emsr_curve.csv");
            let mut w = BufWriter::new(File::create(&path)?);
            writeln!(w, "seat,emsr")?;
            for (seat, value) in curve.iter().enumerate() {
                writeln!(w, "{},{}", seat + 1, value)?;
            }
            w.flush()?;
            println!("curve -> {}", path.display());
            Ok(0)
        }
        Command::Summarize { results, group_by } => {
            let file = File::open(&results)
                .with_context(|| format!("opening results file {}", results.display()))?;
            let rows = read_results_csv(file)?;
            let summary = summarize(&rows, group_by.into())?;
            let path = cli.common.out_dir.join("summary.csv");
            write_summary_csv(BufWriter::new(File::create(&path)?), &summary)?;
            println!("{} groups -> {}", summary.len(), path.display());
            Ok(0)
        }
    }
}

/// Tool subcommands (build-observations, train, dp-solve) take their shared
/// geometry from the baseline preset plus overlay.
fn baseline_for_tools(common: &CommonArgs, overlay: &ConfigOverlay) -> Result<BaselineConfig> {
    let mut config =
        if common.paper_scale { BaselineConfig::paper_scale() } else { BaselineConfig::desk() };
    overlay.apply_to_baseline(&mut config)?;
    config.validate()?;
    Ok(config)
}

fn artifact_dir(out_dir: &Path, no_artifacts: bool) -> Option<PathBuf> {
    if no_artifacts {
        None
    } else {
        Some(out_dir.to_path_buf())
    }
}

fn write_experiment_outputs(out_dir: &Path, run: &ExperimentRun, group_by: GroupBy) -> Result<()> {
    let results_path = out_dir.join("results.csv");
    write_results_csv(BufWriter::new(File::create(&results_path)?), &run.results)?;
    println!("{} result rows -> {}", run.results.len(), results_path.display());
    if run.results.is_empty() {
        return Ok(());
    }
    let summary = summarize(&run.results, group_by)?;
    let summary_path = out_dir.join("summary.csv");
    write_summary_csv(BufWriter::new(File::create(&summary_path)?), &summary)?;
    println!("{} summary rows -> {}", summary.len(), summary_path.display());
    Ok(())
}

fn report_failures(run: &ExperimentRun) {
    for failure in &run.failures {
        eprintln!("scenario {} failed: {}", failure.scenario_id, failure.message);
    }
}

#[cfg(feature = "parallel")]
fn configure_workers(workers: Option<usize>) -> Result<()> {
    if let Some(n) = workers {
        if n == 0 {
            anyhow::bail!("--workers must be at least 1");
        }
        // A second initialization (e.g. in tests) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_workers(workers: Option<usize>) -> Result<()> {
    if workers.map_or(false, |n| n == 0) {
        anyhow::bail!("--workers must be at least 1");
    }
    Ok(())
}
