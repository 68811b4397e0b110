//! Command-line front end: generate synthetic benchmark datasets, run
//! experiment grids, and analyze results into tables, figures and a report.
//!
//! Exit codes: 0 success, 1 any run failed, 2 invalid configuration or
//! inputs. The UGS_SEED environment variable overrides the seed list.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::{cmd_analyze, cmd_generate, cmd_run, GenerateArgs};
use config::{ExperimentConfig, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ugs",
    about = "Unsupervised graph clustering suite: train GNN clustering models, \
             select and tune them with modularity/conductance only, and measure \
             how well those metrics predict ground-truth performance"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic benchmark datasets (adjacency × feature signal grid)
    Generate {
        /// Generate all 9 adjacency×feature combinations
        #[arg(long)]
        grid: bool,
        /// Adjacency signal: distinct | random | null
        #[arg(long)]
        adj: Option<String>,
        /// Feature signal: distinct | random | null
        #[arg(long)]
        feat: Option<String>,
        /// Nodes (default 1000)
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Features (default 500)
        #[arg(long, default_value_t = 500)]
        d: usize,
        /// Planted clusters (default 2)
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Generator seed
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Edge probability for the random adjacency mode
        #[arg(long, default_value_t = 0.5)]
        p_edge: f64,
        /// Bit probability for the random feature mode
        #[arg(long, default_value_t = 0.5)]
        p_feat: f64,
        /// Output directory
        #[arg(long, default_value = "datasets")]
        out: PathBuf,
    },
    /// Execute the experiment grid declared in a TOML config
    Run {
        /// Experiment configuration file
        #[arg(long)]
        config: PathBuf,
        /// Override the output directory
        #[arg(long)]
        out: Option<String>,
        /// Override the seed list, comma-separated
        /// (default {42,24,976,12345,98765,7,856,90,672,785})
        #[arg(long)]
        seeds: Option<String>,
        /// Override the edge fractions, comma-separated (default 1.0)
        #[arg(long)]
        edge_fractions: Option<String>,
        /// Override the per-seed trial budget (default 250)
        #[arg(long)]
        max_trials: Option<usize>,
        /// Override the epoch budget (default 5000)
        #[arg(long)]
        max_epochs: Option<usize>,
        /// Worker count (default: available parallelism minus one)
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Build tables, figures and a markdown report from results directories
    Analyze {
        /// One or more results directories written by `run`
        #[arg(required = true)]
        results: Vec<PathBuf>,
        /// Report output directory
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<T>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate {
            grid,
            adj,
            feat,
            n,
            d,
            k,
            seed,
            p_edge,
            p_feat,
            out,
        } => {
            let args = GenerateArgs {
                grid,
                adj,
                feat,
                n_nodes: n,
                n_features: d,
                k,
                seed,
                p_edge,
                p_feat,
                out,
            };
            match cmd_generate(&args) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Run {
            config,
            out,
            seeds,
            edge_fractions,
            max_trials,
            max_epochs,
            workers,
        } => {
            let overrides = match (|| -> Result<Overrides, String> {
                Ok(Overrides {
                    output_dir: out,
                    seeds: seeds.as_deref().map(parse_list).transpose()?,
                    edge_fractions: edge_fractions.as_deref().map(parse_list).transpose()?,
                    max_trials,
                    max_epochs,
                    workers,
                })
            })() {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: bad flag value: {e}");
                    return ExitCode::from(2);
                }
            };
            let cfg = match ExperimentConfig::load(&config, &overrides) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            };
            match cmd_run(&cfg) {
                Ok((_, true)) => ExitCode::SUCCESS,
                Ok((_, false)) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Analyze { results, out } => match cmd_analyze(&results, &out) {
            Ok(_) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}
