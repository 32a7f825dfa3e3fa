//! `pulsefront` experiment driver.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use config::ConfigError;
use scenarios::{Run, Scenario};

#[derive(Parser)]
#[command(
    name = "pulsefront",
    version,
    about = "Pulsating fronts of spatially periodic bistable reaction-diffusion equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Directory receiving the artifacts; created when missing.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Pulsating front by long-time evolution: speed, profile, pulsating defect.
    Front(Common),
    /// Averaged travelling wave by shooting; optional convergence sweep in L.
    Homogenize(Common),
    /// Principal eigenvalue about a constant state (periodic or Dirichlet).
    Eigen(Common),
    /// Periodic steady states by Newton with their stability class.
    Steady(Common),
    /// Classification of the front over a period grid.
    #[command(name = "scan-e")]
    ScanE(Common),
    /// Convergence of a datum to a shifted front; optional super/subsolutions and spectrum.
    Stability(Common),
    /// Decay exponents of the front tails.
    Decay(Common),
    /// Quenching trend of the oscillating-diffusivity family over a lambda grid.
    QuenchScan(Common),
}

impl Command {
    fn split(self) -> (Scenario, Common) {
        match self {
            Self::Front(c) => (Scenario::Front, c),
            Self::Homogenize(c) => (Scenario::Homogenize, c),
            Self::Eigen(c) => (Scenario::Eigen, c),
            Self::Steady(c) => (Scenario::Steady, c),
            Self::ScanE(c) => (Scenario::ScanE, c),
            Self::Stability(c) => (Scenario::Stability, c),
            Self::Decay(c) => (Scenario::Decay, c),
            Self::QuenchScan(c) => (Scenario::QuenchScan, c),
        }
    }
}

/// Returns the number of failed records.
fn run(scenario: Scenario, common: Common) -> Result<usize> {
    let cfg = config::load(&common.config)?;
    cfg.validate()?;
    if scenario != Scenario::QuenchScan {
        cfg.profile()?;
    }
    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    let mut run = Run::new(cfg, common.out, scenario);
    let result = run.execute();
    run.finish()?;
    result?;
    Ok(run.failures.len())
}

fn main() -> ExitCode {
    let help = config::keys_help();
    let cmd = Cli::command()
        .after_help(help.clone())
        .mut_subcommands(|s| s.after_help(help.clone()));
    let cli = match Cli::from_arg_matches(&cmd.get_matches()) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let (scenario, common) = cli.command.split();
    match run(scenario, common) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} record(s) failed");
            ExitCode::from(1)
        }
        Err(e) => {
            if let Some(c) = e.downcast_ref::<ConfigError>() {
                eprintln!("error: {c}");
                ExitCode::from(2)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        }
    }
}
