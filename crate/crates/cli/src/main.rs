//! `pilotwave`: regenerates two-slit, lens-relay and oscillator figures as
//! CSV, JSON and SVG files.

mod commands;
mod config;
mod error;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Format, RunConfig, TheorySelection};
use crate::error::CliError;
use crate::output::Output;

const DEFAULT_OUT_DIR: &str = "pilotwave-out";

#[derive(Debug, Parser)]
#[command(name = "pilotwave", version, about = "Two-slit Bohmian trajectories, weak values and lens calibration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; unspecified keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, env = "PILOTWAVE_OUT")]
    out: Option<PathBuf>,

    /// Seed for the measurement-noise generator.
    #[arg(long)]
    seed: Option<u64>,

    /// Output formats (repeatable or comma separated).
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Vec<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Intensities and weak values of both theories at one plane.
    Snapshot {
        #[command(flatten)]
        common: Common,
        /// Effective propagation distance (m).
        #[arg(long, allow_hyphen_values = true)]
        z: Option<f64>,
    },
    /// Position and momentum paths over the configured planes.
    Trajectories {
        #[command(flatten)]
        common: Common,
        /// Which ontology to integrate.
        #[arg(long, value_enum)]
        theory: Option<TheorySelection>,
        /// Number of paths, seeded at equally spaced quantiles.
        #[arg(long)]
        seeds: Option<usize>,
        /// Index of a path to draw emphasized.
        #[arg(long)]
        highlight: Option<usize>,
    },
    /// Lens-2 displacement against effective propagation distance.
    LensCalibration {
        #[command(flatten)]
        common: Common,
    },
    /// Quadrature paths and conjugate weak values of the oscillator.
    Oscillator {
        #[command(flatten)]
        common: Common,
        /// Frame angles in radians.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Vec<f64>,
    },
}

fn prepare(common: &Common) -> Result<(RunConfig, Output), CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.weakmeas.seed = seed;
    }
    if !common.format.is_empty() {
        cfg.output.formats = common.format.clone();
    }
    cfg.validate()?;
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let out = Output::new(&dir, &cfg.output.formats)?;
    Ok((cfg, out))
}

fn run(command: Command) -> (Vec<PathBuf>, Result<commands::Warnings, CliError>) {
    let (common, job): (&Common, Box<dyn Fn(&RunConfig, &mut Output) -> Result<commands::Warnings, CliError>>) =
        match &command {
            Command::Snapshot { common, z } => (
                common,
                Box::new(move |cfg, out| commands::snapshot(cfg, z.unwrap_or(cfg.snapshot.z), out)),
            ),
            Command::Trajectories {
                common,
                theory,
                seeds,
                highlight,
            } => (
                common,
                Box::new(move |cfg, out| {
                    let t = &cfg.trajectories;
                    commands::trajectories(
                        cfg,
                        theory.unwrap_or(t.theory),
                        seeds.unwrap_or(t.seeds),
                        highlight.or(t.highlight),
                        out,
                    )
                }),
            ),
            Command::LensCalibration { common } => (common, Box::new(commands::lens_calibration)),
            Command::Oscillator { common, theta } => (
                common,
                Box::new(move |cfg, out| {
                    let thetas = if theta.is_empty() { &cfg.oscillator.thetas } else { theta };
                    commands::oscillator(cfg, thetas, out)
                }),
            ),
        };
    match prepare(common) {
        Ok((cfg, mut out)) => {
            let result = job(&cfg, &mut out);
            (out.written, result)
        }
        Err(e) => (Vec::new(), Err(e)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (written, result) = run(cli.command);
    for path in &written {
        println!("{}", path.display());
    }
    match result {
        Ok(commands::Warnings { guard: None }) => ExitCode::SUCCESS,
        Ok(commands::Warnings { guard: Some(msg) }) => {
            let e = CliError::Numerical(msg);
            eprintln!("pilotwave: {e}");
            e.exit_code()
        }
        Err(e) => {
            eprintln!("pilotwave: {e}");
            e.exit_code()
        }
    }
}
