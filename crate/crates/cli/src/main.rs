use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phaseflow_cli::{commands, CliError, Format, GridSpec, Overrides, RunConfig};

/// Wigner-flow stationarity tools for separable Hamiltonians.
#[derive(Debug, Parser)]
#[command(name = "phaseflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `[output] dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Phase-space grid as `nx,nk,xmax,kmax`.
    #[arg(long, global = true, value_parser = GridSpec::parse_flag)]
    grid: Option<GridSpec>,

    /// Series truncation order.
    #[arg(long, global = true)]
    eta_max: Option<usize>,

    /// Table format for fields and scans.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Export currents, divergence and Liouvillianity on the grid.
    FlowField,
    /// Certify stationarity and the zero mode for a camouflage block.
    CamouflageVerify,
    /// Certify every (zeta, gamma) combination of a scan block.
    Scan,
    /// Pseudospectral zero-mode residual only.
    ZeroMode,
}

const CONFIG_ERROR: u8 = 2;

fn run(cli: Cli) -> Result<commands::Outcome, CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let overrides = Overrides {
        grid: cli.grid,
        eta_max: cli.eta_max,
        out: cli.out,
        format: cli.format,
    };
    let cfg = RunConfig::parse_with(&text, &overrides)?;
    match cli.command {
        Command::FlowField => commands::flow_field(&cfg),
        Command::CamouflageVerify => commands::camouflage_verify(&cfg),
        Command::Scan => commands::scan(&cfg),
        Command::ZeroMode => commands::zero_mode(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if let Some(status) = outcome
                .report
                .get("passed")
                .or(outcome.report.get("converged"))
            {
                println!("passed: {status}");
            }
            ExitCode::from(outcome.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}
