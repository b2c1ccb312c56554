//! `bbmlab`: simulate branching Brownian motion, compute F-KPP constants and
//! run the verification suite.

mod config;
mod fkpp_cmd;
mod manifest;
mod simulate_cmd;
mod svg;
mod verify_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

pub const THREADS_ENV: &str = "BBMLAB_THREADS";

#[derive(Parser)]
#[command(name = "bbmlab", version, about = "Branching Brownian motion lab")]
struct Cli {
    /// TOML file with `[simulate]`, `[fkpp]` and `[verify]` tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replicas and write summaries, records and a manifest.
    Simulate(SimulateArgs),
    /// Solve the F-KPP equation and record tail constants in a registry.
    Fkpp(FkppArgs),
    /// Run the pre-registered test suite on a run directory.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Default)]
pub struct SimulateArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated observation times; the horizon is always added.
    #[arg(long, value_delimiter = ',')]
    pub obs_times: Option<Vec<f64>>,
    /// `off`, `default` (offset 4√t) or a numeric offset.
    #[arg(long)]
    pub prune: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overwrite a non-empty output directory.
    #[arg(long)]
    pub force: bool,
    /// Replicas (from 0) whose genealogy, snapshots, extremal points and
    /// D_L fields are written in full.
    #[arg(long)]
    pub keep_records: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub field_times: Option<Vec<f64>>,
    #[arg(long)]
    pub height_floor: Option<f64>,
    #[arg(long)]
    pub clan_lookback: Option<f64>,
    /// Protocol JSON to pre-register instead of the built-in one.
    #[arg(long)]
    pub protocol: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct FkppArgs {
    /// Compute γ from step initial data.
    #[arg(long)]
    pub gamma: bool,
    /// Compute C(φ) for `ramp:a=<a>,x0=<x0>,w=<w>`; repeatable.
    #[arg(long)]
    pub cphi: Vec<String>,
    #[arg(long)]
    pub ell_max: Option<f64>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// `sqrt2` (w e^{√2w}) or `sqrtw` (w e^{√w}).
    #[arg(long)]
    pub weight: Option<String>,
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Directory for convergence tables and the front trace.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct VerifyArgs {
    #[arg(long)]
    pub run: Option<PathBuf>,
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Report directory; defaults to `<run>/verify`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Protocol JSON checked against the one registered in the run.
    #[arg(long)]
    pub protocol: Option<PathBuf>,
    /// Replace a registered protocol that differs from `--protocol`.
    #[arg(long)]
    pub override_protocol: bool,
}

fn init_threads() -> Result<usize> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
        if n == 0 {
            anyhow::bail!("{THREADS_ENV} must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(rayon::current_num_threads())
}

fn run() -> Result<u8> {
    let cli = Cli::parse();
    let file = config::load(cli.config.as_deref())?;
    let threads = init_threads()?;
    match cli.cmd {
        Command::Simulate(a) => simulate_cmd::run(a, file.simulate, threads).map(|_| 0),
        Command::Fkpp(a) => fkpp_cmd::run(a, file.fkpp),
        Command::Verify(a) => verify_cmd::run(a, file.verify),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
