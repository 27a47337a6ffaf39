use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use netstab::commands;
use netstab::config::ExperimentConfig;
use netstab::{AppError, AppResult};

#[derive(Parser)]
#[command(
    name = "netstab",
    about = "Opinion/action dynamics on social graphs: simulation, stability \
             certification, and GA-based topology redesign"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Edge-list graph file; overrides the config's graph spec.
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// Output directory (default: current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Replace every seed in the config with this value.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the configured graph and write it as an edge list.
    Generate,
    /// Simulate the coupled dynamics and write trajectory + stability report.
    Simulate,
    /// Redesign the topology with the GA and write the design artifacts.
    Design,
    /// Emit the lattice/small-world stability comparison table.
    Table1,
    /// Run the cross-module property suites.
    Verify,
}

fn load_config(cli: &Cli) -> AppResult<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| AppError::Config("--config is required for this subcommand".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed_override {
        cfg.override_seeds(seed);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> AppResult<()> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    match cli.cmd {
        Cmd::Generate => {
            commands::cmd_generate(&load_config(cli)?, &out, cli.quiet)?;
        }
        Cmd::Simulate => {
            commands::cmd_simulate(&load_config(cli)?, cli.graph.as_deref(), &out, cli.quiet)?;
        }
        Cmd::Design => {
            commands::cmd_design(&load_config(cli)?, cli.graph.as_deref(), &out, cli.quiet)?;
        }
        Cmd::Table1 => {
            commands::cmd_table1(&load_config(cli)?, &out, cli.quiet)?;
        }
        Cmd::Verify => {
            let cfg = match &cli.config {
                Some(path) => {
                    let mut c = ExperimentConfig::load(path)?;
                    if let Some(seed) = cli.seed_override {
                        c.override_seeds(seed);
                    }
                    Some(c)
                }
                None => None,
            };
            commands::cmd_verify(cfg.as_ref(), cli.quiet)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
