use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use commands::Outcome;
use config::{parse_config, RunConfig};

/// Simulates the Hessian quotient flow on flat complex tori.
#[derive(Parser)]
#[command(name = "qflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (`key = value` lines and mode rows).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized checks; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Restrict fields to the first complex coordinate.
    #[arg(long, global = true)]
    toy: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run the flow and write series.csv, u_hat.qf1 and summary.txt.
    Flow,
    /// Check the configured subsolution.
    CheckSub,
    /// Compare the fast kernels with the brute-force oracles.
    Selftest,
}

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn load(cli: &Cli) -> Result<RunConfig, String> {
    let needs_geometry = !matches!(cli.command, Command::Selftest);
    let mut config = match &cli.config {
        Some(path) => {
            let parsed = parse_config(path).map_err(|e| format!("{}: {e}", path.display()))?;
            if needs_geometry {
                parsed.require_geometry().map_err(|e| format!("{}: {e}", path.display()))?;
            }
            parsed.into_config()
        }
        None if needs_geometry => return Err("--config is required".into()),
        None => RunConfig::default(),
    };
    if cli.toy && !config.toy {
        // re-validate the mode tables against the narrower grid
        let dims_ok = [&config.rho, &config.psi_modes, &config.ubar, &config.ustar]
            .iter()
            .all(|modes| modes.iter().all(|m| m.freq[2..].iter().all(|&f| f == 0)));
        if !dims_ok {
            return Err("--toy: mode rows vary along coordinates other than x1, y1".into());
        }
        config.toy = true;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qflow: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = match cli.command {
        Command::Flow => {
            let out = config.out.clone().unwrap_or_else(|| PathBuf::from("qflow-out"));
            commands::cmd_flow(&config, &out)
        }
        Command::CheckSub => commands::cmd_check_sub(&config),
        Command::Selftest => commands::cmd_selftest(&config),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("qflow: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
