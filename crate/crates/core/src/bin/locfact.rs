use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use locfact::harness::{self, ExperimentConfig, ExperimentReport, Format};
use locfact::{Error, Result};

/// Numerical checks of the local factorisation of quantum spin dynamics.
#[derive(Parser)]
#[command(name = "locfact", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a config, then print the constants block.
    Validate { config: PathBuf },
    /// Run the factorisation sweep.
    Factorize {
        config: PathBuf,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated subset of csv,json,svg; overrides `output.formats`.
        #[arg(long, value_delimiter = ',')]
        format: Option<Vec<Format>>,
    },
    /// Run the Lieb-Robinson sweep.
    Lr {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        format: Option<Vec<Format>>,
    },
    /// Print the decay constants and velocity data as JSON.
    Constants { config: PathBuf },
    /// Re-emit a stored report.json in other formats.
    Report {
        dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "csv,json,svg")]
        format: Vec<Format>,
    },
}

#[derive(Serialize)]
struct ConstantsBlock<'a> {
    constants: &'a locfact::decay::DecayConstants,
    velocity: &'a locfact::interactions::VelocityData,
    geometry: &'a harness::GeometrySummary,
}

fn print_constants(cfg: &ExperimentConfig) -> Result<()> {
    let block = ConstantsBlock { constants: &cfg.constants, velocity: &cfg.velocity, geometry: &cfg.geometry };
    println!("{}", serde_json::to_string_pretty(&block)?);
    Ok(())
}

fn summarize(report: &ExperimentReport) {
    for c in &report.factorization {
        println!(
            "R={:<3} |t-s|={:<6} {:<5} error={} bound={:.6e} {}",
            c.r,
            c.dt,
            format!("{:?}", c.side).to_lowercase(),
            c.error.map_or("-".to_string(), |e| format!("{e:.6e}")),
            c.theorem_rhs.min(2.0),
            if c.satisfied { "ok" } else { "VIOLATED" }
        );
    }
    for c in &report.lieb_robinson {
        println!(
            "B@{:<3} d={:<3} |t-s|={:<6} lhs={} rhs={:.6e} {}",
            c.b_site,
            c.separation,
            c.dt,
            c.lhs.map_or("-".to_string(), |e| format!("{e:.6e}")),
            c.rhs,
            if c.satisfied { "ok" } else { "VIOLATED" }
        );
    }
}

fn run_sweep(
    config: &Path,
    out: Option<PathBuf>,
    format: Option<Vec<Format>>,
    sweep: fn(&ExperimentConfig) -> Result<ExperimentReport>,
) -> Result<bool> {
    let cfg = harness::load_config(config)?;
    let report = sweep(&cfg)?;
    let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.spec.output.dir));
    let formats = format.unwrap_or_else(|| cfg.spec.output.formats.clone());
    summarize(&report);
    for p in harness::emit(&report, &formats, &dir)? {
        println!("wrote {}", p.display());
    }
    Ok(report.all_satisfied())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = harness::load_config(&config)?;
            println!("{}: valid", config.display());
            print_constants(&cfg)?;
            Ok(true)
        }
        Command::Constants { config } => {
            print_constants(&harness::load_config(&config)?)?;
            Ok(true)
        }
        Command::Factorize { config, out, format } => run_sweep(&config, out, format, harness::run_factorization_sweep),
        Command::Lr { config, out, format } => run_sweep(&config, out, format, harness::run_lr_sweep),
        Command::Report { dir, format } => {
            let path = dir.join(harness::REPORT_JSON);
            let report = ExperimentReport::load(&path)
                .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
            for p in harness::emit(&report, &format, &dir)? {
                println!("wrote {}", p.display());
            }
            Ok(report.all_satisfied())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("at least one inequality is violated");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
