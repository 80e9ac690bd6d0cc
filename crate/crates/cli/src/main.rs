use clap::{Parser, Subcommand};
use sofr_cli::commands::{self, status_of, Output};
use sofr_cli::exit;
use sofr_cli::scenario::Scenario;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// SOFR futures, swaps and options under a one-factor Gaussian model.
///
/// Exit status: 0 success, 2 invalid input, 3 failed numerical check.
#[derive(Parser)]
#[command(name = "sofr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form prices, fair rates and per-leg / per-caplet breakdowns as JSON.
    Price {
        scenario: PathBuf,
        /// Write the JSON here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Self-financing futures replication at several rebalancing steps; summary JSON.
    HedgeSim {
        scenario: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// CSV ledger `t,V,Vp,C,phi0,phi1..,target,error` of the first path at the finest step.
        #[arg(long)]
        ledger: Option<PathBuf>,
        /// Override `hedge.paths`.
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Closed form against Monte Carlo for every instrument; exits 3 if any |z| exceeds `mc.z_limit`.
    McVerify {
        scenario: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Override `mc.paths`.
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Futures rates and prices of the scenario's futures contracts as CSV.
    FuturesCurve {
        scenario: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn write(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| anyhow::anyhow!("writing {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let (out, output, ledger_path): (Output, Option<PathBuf>, Option<PathBuf>) = match cli.command {
        Command::Price { scenario, output } => (commands::price(&Scenario::load(&scenario)?)?, output, None),
        Command::HedgeSim { scenario, output, ledger, paths } => {
            (commands::hedge_sim(&Scenario::load(&scenario)?, paths)?, output, ledger)
        }
        Command::McVerify { scenario, output, paths } => {
            (commands::mc_verify(&Scenario::load(&scenario)?, paths)?, output, None)
        }
        Command::FuturesCurve { scenario, output } => {
            (commands::futures_curve(&Scenario::load(&scenario)?)?, output, None)
        }
    };
    if let (Some(p), Some(csv)) = (ledger_path.as_deref(), out.ledger.as_deref()) {
        write(Some(p), csv)?;
    }
    write(output.as_deref(), &out.text)?;
    Ok(out.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => {
            if code == exit::CHECK_FAILED {
                eprintln!("sofr: numerical check failed");
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("sofr: {e:#}");
            ExitCode::from(status_of(&e) as u8)
        }
    }
}
