//! `riskon` command line front end.
//!
//! Exit codes: 0 on success, 2 when inputs or configuration fail
//! validation, 3 when a computation fails on valid inputs.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use riskon_core::config::{Config, Universe};
use riskon_core::error::Error;
use riskon_core::fixtures::{generate, write_to_dir, FixtureSpec};
use riskon_core::report::{export_signals, run_matrix, ExperimentMatrix};
use riskon_core::strategy::StrategyId;

#[derive(Parser)]
#[command(name = "riskon", version, about = "Risk-on/risk-off backtesting engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Md,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment matrix and write results, tables and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Restrict to these universes (repeatable). Default: all in config.
        #[arg(long = "universe")]
        universes: Vec<String>,
        /// Restrict to these strategies (repeatable). Default: all in config.
        #[arg(long = "strategy")]
        strategies: Vec<String>,
        #[arg(long = "data-dir")]
        data_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute and export the three signal series as date,value CSVs.
    Signals {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "data-dir")]
        data_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a performance table from a previous run's output directory.
    Table {
        /// Universe subdirectory of a run output (e.g. out/SP500).
        #[arg(long)]
        dir: PathBuf,
        #[arg(long = "out-format", value_enum, default_value = "csv")]
        out_format: TableFormat,
    },
    /// Write the bundled synthetic dataset into a directory.
    GenFixtures {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2500)]
        days: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn parse_list<T: FromStr<Err = String>>(items: &[String], what: &str) -> Result<Option<Vec<T>>, Error> {
    if items.is_empty() {
        return Ok(None);
    }
    items
        .iter()
        .map(|s| s.parse().map_err(|e| Error::Config(format!("bad {what}: {e}"))))
        .collect::<Result<Vec<T>, Error>>()
        .map(Some)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            universes,
            strategies,
            data_dir,
            out,
        } => {
            let config = Config::from_file(&config)?;
            let universes: Option<Vec<Universe>> = parse_list(&universes, "universe")?;
            let strategies: Option<Vec<StrategyId>> = parse_list(&strategies, "strategy")?;
            let matrix = ExperimentMatrix::new(config, universes, strategies)?;
            let manifest = run_matrix(&matrix, &data_dir, &out)?;
            println!(
                "wrote {} files to {}",
                manifest.outputs.len() + 1,
                out.display()
            );
            Ok(())
        }
        Command::Signals { config, data_dir, out } => {
            let config = Config::from_file(&config)?;
            let written = export_signals(&config, &data_dir, &out)?;
            println!("wrote {} to {}", written.join(", "), out.display());
            Ok(())
        }
        Command::Table { dir, out_format } => {
            let name = match out_format {
                TableFormat::Csv => "perf_table.csv",
                TableFormat::Md => "perf_table.md",
            };
            let path = dir.join(name);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            print!("{text}");
            Ok(())
        }
        Command::GenFixtures { out, days, seed } => {
            let data = generate(&FixtureSpec {
                n_days: days,
                seed,
                ..Default::default()
            })?;
            write_to_dir(&out, &data)?;
            println!("wrote synthetic dataset ({days} days) to {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
