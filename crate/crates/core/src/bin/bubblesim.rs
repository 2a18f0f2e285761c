//! Command-line front end.
//!
//! Exit codes: 0 success, 1 internal invariant violation or failed
//! self-check, 2 config or usage error, 3 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use bubblesim::report::{estimate, format_summary, summarize};
use bubblesim::sim_engine::{load_dataset, run_sweep, write_metric_tables};
use bubblesim::verify::verify_example;
use bubblesim::{SimError, SweepConfig};

#[derive(Parser, Debug)]
#[command(name = "bubblesim", version, about = "Filter-bubble consumption simulator")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Config file; the desk-scale defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override a config key (repeatable), e.g. --set rho_grid=0,0.9
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Start from the full paper-scale grid instead of the desk default.
    #[arg(long)]
    paper_grid: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a sweep, write CSV outputs and print a per-regime summary.
    Run {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute metric tables from an existing run directory.
    Aggregate {
        input_dir: PathBuf,
        /// Where to write the metric CSVs (default: the input directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the four-item worked example.
    VerifyExample,
    /// Print trajectory counts and a projected wall time.
    Estimate {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Further config files to estimate with the same calibration.
        #[arg(long = "also")]
        also: Vec<PathBuf>,
    },
}

fn load_config(args: &SweepArgs) -> Result<SweepConfig, SimError> {
    let mut cfg = match &args.config {
        Some(path) => SweepConfig::from_file(path)?,
        None if args.paper_grid => SweepConfig::paper_scale(),
        None => SweepConfig::desk(),
    };
    if args.paper_grid && args.config.is_some() {
        let paper = SweepConfig::paper_scale();
        cfg.gamma_grid = paper.gamma_grid;
        cfg.sigma_grid = paper.sigma_grid;
        cfg.rho_grid = paper.rho_grid;
        cfg.beta_grid = paper.beta_grid;
        cfg.populations = paper.populations;
        cfg.users_per_population = paper.users_per_population;
    }
    for o in &args.overrides {
        cfg.apply_override(o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode, SimError> {
    let workers = cli.workers.unwrap_or_else(rayon::current_num_threads);
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| SimError::config("workers", e.to_string()))?;
    }
    match cli.command {
        Command::Run { sweep, out } => {
            let mut cfg = load_config(&sweep)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(w) = cfg.work_warning() {
                eprintln!("warning: {w}");
            }
            let ds = run_sweep(&cfg)?;
            eprintln!(
                "wrote {} trajectories to {}",
                ds.records.len(),
                cfg.output_dir.display()
            );
            print!("{}", format_summary(&summarize(&ds)?));
        }
        Command::Aggregate { input_dir, out } => {
            let ds = load_dataset(&input_dir)?;
            let out = out.unwrap_or(input_dir);
            std::fs::create_dir_all(&out).map_err(|e| SimError::io(&out, e))?;
            write_metric_tables(&ds.tables, &out)?;
            print!("{}", format_summary(&summarize(&ds)?));
        }
        Command::VerifyExample => {
            let report = verify_example()?;
            println!("{report}");
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Estimate { sweep, also } => {
            let mut configs = vec![load_config(&sweep)?];
            for path in also {
                configs.push(SweepConfig::from_file(&path)?);
            }
            for (k, cfg) in configs.iter().enumerate() {
                if k > 0 {
                    println!();
                }
                let est = estimate(cfg, workers, Duration::from_secs(1))?;
                print!("{}", est.render());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
