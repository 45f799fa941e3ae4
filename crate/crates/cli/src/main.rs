#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod commands;
mod config;
mod csv;

use clap::{Parser, Subcommand};
use config::{Config, ConfigError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Stochastic flows on adapted frame bundles of foliated manifolds.
#[derive(Parser)]
#[command(name = "foliated-flows", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV files (overrides `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one deterministic or stochastic frame flow.
    Flow(Common),
    /// Monte-Carlo estimates of the transverse or full semigroup.
    Semigroup(Common),
    /// Solve for the invariant density.
    Invariant(Common),
    /// Dilate the leafwise metric by the invariant density.
    Dilate(Common),
    /// Moment identities and measure table on a dilated torus bundle.
    Carriere(Common),
    /// Run the verification suite; exits 1 if any check fails.
    Verify(Common),
}

type Runner = fn(&Config, &std::path::Path) -> anyhow::Result<bool>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common, run): (&str, Common, Runner) = match cli.command {
        Command::Flow(c) => ("flow", c, commands::flow),
        Command::Semigroup(c) => ("semigroup", c, commands::semigroup),
        Command::Invariant(c) => ("invariant", c, commands::invariant),
        Command::Dilate(c) => ("dilate", c, commands::dilate),
        Command::Carriere(c) => ("carriere", c, commands::carriere),
        Command::Verify(c) => ("verify", c, commands::verify),
    };
    let cfg = match Config::load(name, &common.config, common.seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = cfg.out_dir(common.out);
    match run(&cfg, &out) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<ConfigError>() => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
