//! `wignerlab` command-line frontend.

mod commands;
mod figures;
mod inputs;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use wignerlab::{make_grid, Grid};

#[derive(Parser, Debug)]
#[command(
    name = "wignerlab",
    version,
    about = "Phase-space quantum mechanics on a lattice"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Coordinate lattice as `qmin:qmax:N` for commands that build states
    /// (default -12:12:256; figures size their own).
    #[arg(
        long,
        global = true,
        allow_hyphen_values = true,
        value_name = "QMIN:QMAX:N"
    )]
    pub grid: Option<String>,

    /// Value of hbar for newly built lattices.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Seed for randomized states.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a Gaussian, cat or random superposition state.
    State(StateArgs),
    /// Wigner function of a wavefunction file.
    Wdf { input: PathBuf },
    /// Pass a state through a filter described in JSON.
    Filter { state: PathBuf, filter: PathBuf },
    /// Detection map of a state read out by a device.
    Detect { state: PathBuf, device: PathBuf },
    /// Propagate a state under a polynomial potential.
    Evolve(EvolveArgs),
    /// Transition probability and interaction class of two states.
    Overlap { first: PathBuf, second: PathBuf },
    /// Phase-space extent diagnostics.
    Blob { input: PathBuf },
    /// Data behind the guide's figures.
    Figure(FigureArgs),
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("kind").required(true).args(["gaussian", "cat", "random", "spec"])))]
pub struct StateArgs {
    /// Gaussian packet; parameters `q0=`, `center=`, `p0=`.
    #[arg(long)]
    pub gaussian: bool,
    /// Two-hump cat state; parameters `qi=`, `d=`.
    #[arg(long)]
    pub cat: bool,
    /// Seeded superposition of Gaussian packets; parameter `terms=`.
    #[arg(long)]
    pub random: bool,
    /// State descriptor as a JSON file or inline JSON.
    #[arg(long, value_name = "JSON")]
    pub spec: Option<String>,
    /// `key=value` parameters for the chosen kind.
    #[arg(value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Base name of the output files.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    /// Wavefunction or Wigner-function file.
    pub input: PathBuf,
    /// Potential as a JSON file or inline JSON:
    /// `{"coefficients": [...], "mass": m}` or `{"harmonic": {"mass": m, "omega": w}}`.
    #[arg(long)]
    pub potential: String,
    /// Total time.
    #[arg(long)]
    pub t: f64,
    /// Largest time step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Highest quantum-correction order kept.
    #[arg(long, default_value_t = 3)]
    pub series_order: usize,
    #[arg(long, value_enum, default_value_t = StepperArg::Split4)]
    pub stepper: StepperArg,
    /// Also write a snapshot every this many steps.
    #[arg(long, default_value_t = 0)]
    pub every: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum StepperArg {
    Split4,
    Rk4,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub which: Figure,
    /// Width of the incident state (default 2 for fig2, 1 otherwise).
    #[arg(long)]
    pub qi: Option<f64>,
    /// Width of the slit (default 1 for fig2, `qi` otherwise).
    #[arg(long)]
    pub qm: Option<f64>,
    /// Hump offset of the cat (default `4 qi`).
    #[arg(long)]
    pub d: Option<f64>,
}

impl Global {
    /// The `--grid` lattice, or `default` when the flag is absent.
    pub fn grid_or(&self, default: (f64, f64, usize)) -> Result<Grid> {
        let (lo, hi, n) = match &self.grid {
            Some(text) => parse_grid(text)?,
            None => default,
        };
        Ok(make_grid(lo, hi, n)?.with_hbar(self.hbar)?)
    }
}

pub const DESK_GRID: (f64, f64, usize) = (-12.0, 12.0, 256);

fn parse_grid(text: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        bail!("--grid expects qmin:qmax:N, got {text:?}");
    };
    let lo = lo
        .parse()
        .with_context(|| format!("bad qmin in --grid {text:?}"))?;
    let hi = hi
        .parse()
        .with_context(|| format!("bad qmax in --grid {text:?}"))?;
    let n = n
        .parse()
        .with_context(|| format!("bad N in --grid {text:?}"))?;
    Ok((lo, hi, n))
}

fn init_threads() -> Result<()> {
    if let Ok(value) = std::env::var("WIGNERLAB_THREADS") {
        let n: usize = value.parse().with_context(|| {
            format!("WIGNERLAB_THREADS must be a positive integer, got {value:?}")
        })?;
        if n == 0 {
            bail!("WIGNERLAB_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

/// 1 for numerical-invariant violations, 2 for everything the user can fix
/// by changing arguments or files.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err
        .chain()
        .find_map(|e| e.downcast_ref::<wignerlab::Error>())
    {
        Some(e) if !e.is_usage() => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| commands::run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
