use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use charwave::cli::{self, Command};
use charwave::config::parse_config;

#[derive(Parser)]
#[command(
    name = "charwave",
    about = "Characteristic-based solver and lifespan measurement for u_tt - c(u_x)^2 u_xx = 0",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Experiment config file (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides CHARWAVE_OUT and the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sweep worker count (overrides the config)
    #[arg(long)]
    workers: Option<usize>,
    /// Reject unknown config keys
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Single simulation: snapshots, series and stop info
    Run(Common),
    /// ε sweep producing a lifespan records CSV (plus a fit when configured)
    Sweep(Common),
    /// Fit a scaling law to a records CSV
    Fit(Common),
    /// Validate the wave speed against its claimed structure
    ValidateSpeed(Common),
    /// Trace characteristics with the Riccati variable
    Trace(Common),
    /// Classify the data against the blowup/global conditions
    Classify(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Cmd::Run(c) => (Command::Run, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
        Cmd::Fit(c) => (Command::Fit, c),
        Cmd::ValidateSpeed(c) => (Command::ValidateSpeed, c),
        Cmd::Trace(c) => (Command::Trace, c),
        Cmd::Classify(c) => (Command::Classify, c),
    };
    let text = match std::fs::read_to_string(&common.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", common.config.display());
            return ExitCode::from(cli::EXIT_ERROR as u8);
        }
    };
    let cfg = match parse_config(&text, common.strict) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(cli::EXIT_ERROR as u8);
        }
    };
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let out_dir = cli::resolve_out_dir(&cfg, common.out.as_deref());
    match cli::dispatch(&cfg, command, &out_dir, common.workers) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::EXIT_ERROR as u8)
        }
    }
}
