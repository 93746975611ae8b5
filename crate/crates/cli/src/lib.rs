//! Command-line driver: generation, window analysis, detection and batch
//! experiments with CSV outputs.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod store;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::AnalysisInput;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "hglfr", version, about = "Hierarchical LFR benchmarks and resolution-window analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run configuration (TOML, schema "hglfr-config/1").
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// First seed; realizations use consecutive seeds from here.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Resolution grid for sweeps, `start:stop:points:log|lin`.
    #[arg(long)]
    pub gamma_grid: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one network directory per cell and realization.
    Generate(RunArgs),
    /// Report Ω, resolution window, mixing and modularity per level.
    Analyze {
        /// Network directory written by `generate`.
        #[arg(required_unless_present_any = ["edges", "omega"], conflicts_with_all = ["edges", "omega"])]
        network: Option<PathBuf>,
        /// Edge list, used with one or more --partition files.
        #[arg(long, requires = "partition")]
        edges: Option<PathBuf>,
        #[arg(long)]
        partition: Vec<PathBuf>,
        /// Dense Ω matrix CSV; reports its window only.
        #[arg(long, conflicts_with = "edges")]
        omega: Option<PathBuf>,
        /// Directory for analysis.csv and omega_l<i>.csv; stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score detection methods against the ground truth of a network.
    Detect {
        network: PathBuf,
        #[arg(long, default_value = "lp,mod")]
        methods: String,
        /// Resolutions for modularity, comma-separated.
        #[arg(long, default_value = "1")]
        gammas: String,
        /// Detection seeds, comma-separated.
        #[arg(long, default_value = "0")]
        seeds: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Modularity of every hierarchy level across a resolution grid.
    Sweep {
        network: PathBuf,
        #[arg(long)]
        gamma_grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full experiment grid and write the experiment tables.
    Batch(RunArgs),
}

fn load(args: &RunArgs) -> CliResult<(RunConfig, PathBuf)> {
    let mut cfg = RunConfig::load(&args.config)?;
    let out = commands::apply_overrides(&mut cfg, args.out.clone(), args.seed, args.gamma_grid.clone())?;
    Ok((cfg, out))
}

fn print_csv<T: serde::Serialize>(header: &[&str], rows: &[T]) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(std::io::stdout());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(CliError::from)
}

/// Executes a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate(args) => {
            let (cfg, out) = load(&args)?;
            let dirs = commands::cmd_generate(&cfg, &out, args.workers)?;
            eprintln!("wrote {} networks under {}", dirs.len(), out.display());
        }
        Command::Analyze { network, edges, partition, omega, out } => {
            let input = match (network, edges, omega) {
                (Some(dir), _, _) => AnalysisInput::NetworkDir(dir),
                (None, Some(edges), _) => AnalysisInput::Files { edges, partitions: partition },
                (None, None, Some(path)) => AnalysisInput::Omega(path),
                (None, None, None) => {
                    return Err(CliError::config("give a network directory, --edges with --partition, or --omega"))
                }
            };
            let rows = commands::cmd_analyze(&input, out.as_deref())?;
            if out.is_none() {
                print_csv(commands::ANALYSIS_HEADER, &rows)?;
            }
        }
        Command::Detect { network, methods, gammas, seeds, out } => {
            let methods = commands::parse_methods(&methods)?;
            let gammas = commands::parse_list::<f64>("--gammas", &gammas)?;
            if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
                return Err(CliError::config(format!("--gammas: {g} is not a positive resolution")));
            }
            let seeds = commands::parse_list::<u64>("--seeds", &seeds)?;
            let (rows, _) = commands::cmd_detect(&network, &methods, &gammas, &seeds, out.as_deref())?;
            if out.is_none() {
                print_csv(commands::DETECTION_HEADER, &rows)?;
            }
        }
        Command::Sweep { network, gamma_grid, out } => {
            let grid = experiment::sweep_grid(gamma_grid.as_deref())
                .map_err(|e| CliError::config(format!("--gamma-grid: {e}")))?;
            let (rows, _) = commands::cmd_sweep(&network, &grid, out.as_deref())?;
            if out.is_none() {
                print_csv(commands::SWEEP_HEADER, &rows)?;
            }
        }
        Command::Batch(args) => {
            let (cfg, out) = load(&args)?;
            let report = commands::cmd_batch(&cfg, &out, args.workers)?;
            eprintln!("{} networks measured, tables in {}", report.networks.len(), out.display());
        }
    }
    Ok(())
}
