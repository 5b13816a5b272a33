//! `quadflow`: constants, trajectories, phase portraits, the q-map and the
//! verification suite from the command line.

mod commands;
mod config;
mod error;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::ConfigFile;
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "quadflow",
    version,
    about = "Solver for x' = a/x + b/y, y' = g/x + d/y on the quadrant"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    #[arg(short = 'a', long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(short = 'b', long, global = true, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(short = 'g', long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(short = 'd', long, global = true, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Override the first component of the direction.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Override the second component of the direction.
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// `key = value` file supplying any flag; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_step: Option<f64>,
    #[arg(long, global = true)]
    pub initial_step: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub corner_handoff_time: Option<f64>,
    #[arg(long, global = true)]
    pub oracle_step: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Classification, direction, corner constants and contraction constants.
    Constants,
    /// One trajectory as `t,x,y,regime` rows.
    Solve(SolveArgs),
    /// Trajectories from the corner and from points of a level set.
    Portrait(PortraitArgs),
    /// Run every property check.
    Verify(VerifyArgs),
    /// The renormalization map on a grid of the unit level set.
    Qmap(QmapArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub y0: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Output spacing; without it every accepted step is printed.
    #[arg(long)]
    pub dt_out: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct PortraitArgs {
    /// Number of runs, the corner included.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Defaults to the time by which every run has passed the level `r_max`.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Write one CSV per run plus `index.json` into this directory.
    #[arg(long)]
    pub per_run_dir: Option<PathBuf>,
    /// Path of the JSON index; defaults next to `--out`.
    #[arg(long)]
    pub index: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Verify this many seeded random coefficient sets instead of the given one.
    #[arg(long)]
    pub random_coeffs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct QmapArgs {
    #[arg(long)]
    pub grid: Option<usize>,
}

/// Applies the config file beneath the command-line values.
fn merge_config(cli: &mut Cli) -> Result<(), CliError> {
    let Some(path) = cli.global.config.clone() else {
        return Ok(());
    };
    let file = ConfigFile::load(&path)?;
    let g = &mut cli.global;
    file.fill(&mut g.alpha, "alpha")?;
    file.fill(&mut g.beta, "beta")?;
    file.fill(&mut g.gamma, "gamma")?;
    file.fill(&mut g.delta, "delta")?;
    file.fill(&mut g.lambda, "lambda")?;
    file.fill(&mut g.mu, "mu")?;
    file.fill(&mut g.seed, "seed")?;
    file.fill(&mut g.format, "format")?;
    file.fill(&mut g.out, "out")?;
    file.fill(&mut g.rel_tol, "rel-tol")?;
    file.fill(&mut g.abs_tol, "abs-tol")?;
    file.fill(&mut g.max_step, "max-step")?;
    file.fill(&mut g.initial_step, "initial-step")?;
    file.fill(&mut g.epsilon_fraction, "epsilon-fraction")?;
    file.fill(&mut g.corner_handoff_time, "corner-handoff-time")?;
    file.fill(&mut g.oracle_step, "oracle-step")?;
    match &mut cli.command {
        Command::Constants => {}
        Command::Solve(a) => {
            file.fill(&mut a.x0, "x0")?;
            file.fill(&mut a.y0, "y0")?;
            file.fill(&mut a.t_end, "t-end")?;
            file.fill(&mut a.dt_out, "dt-out")?;
        }
        Command::Portrait(a) => {
            file.fill(&mut a.grid, "grid")?;
            file.fill(&mut a.r_max, "r-max")?;
            file.fill(&mut a.t_end, "t-end")?;
            file.fill(&mut a.per_run_dir, "per-run-dir")?;
            file.fill(&mut a.index, "index")?;
        }
        Command::Verify(a) => file.fill(&mut a.random_coeffs, "random-coeffs")?,
        Command::Qmap(a) => file.fill(&mut a.grid, "grid")?,
    }
    Ok(())
}

fn run(mut cli: Cli) -> Result<bool, CliError> {
    merge_config(&mut cli)?;
    let g = &cli.global;
    match &cli.command {
        Command::Constants => commands::constants(g).map(|_| true),
        Command::Solve(a) => commands::solve(g, a).map(|_| true),
        Command::Portrait(a) => commands::portrait(g, a).map(|_| true),
        Command::Verify(a) => commands::verify(g, a),
        Command::Qmap(a) => commands::qmap(g, a).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(error::EXIT_VERIFY_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
