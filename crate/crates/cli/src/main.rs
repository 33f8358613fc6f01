//! `biphoton`: simulate, analyze, and check the two-crystal entangled-pair
//! source experiments from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use biphoton_cli::config::{config_error, ConfigError, RunConfig};
use biphoton_cli::experiments::{self, ExperimentOutput, Mode};
use biphoton_cli::write_outputs;

#[derive(Parser)]
#[command(
    name = "biphoton",
    version,
    about = "Two-crystal polarization-entangled pair source: simulation and analysis",
    propagate_version = true
)]
struct Cli {
    /// TOML run configuration (defaults are the calibrated source).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override the base RNG seed of stochastic runs.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Analyze a measured-data CSV instead of the model. Reference-check
    /// failures then exit with code 3.
    #[arg(long, global = true, value_name = "PATH")]
    fixture: Option<PathBuf>,

    /// Use exact quantum expectations (infinite statistics), no sampling.
    #[arg(long, global = true)]
    exact: bool,

    /// Directory for report files and CSV artifacts (stdout only if unset).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fringe-visibility scans in the linear and coherence bases.
    Visibility,
    /// Reconstructed tangle versus HH-crystal temperature.
    TangleSweep,
    /// CHSH Bell test (four settings in the z–x plane).
    Chsh,
    /// (2,3) Bell test (twelve settings, all three Pauli axes).
    Bbell,
    /// Leggett-model test (three plane pairs at separation angle phi).
    Leggett,
    /// Root-spectral overlap of the two emission spectra.
    Overlap {
        /// Measured HH-path spectrum CSV (wavelength_nm,density).
        spectrum_hh: Option<PathBuf>,
        /// Measured VV-path spectrum CSV (wavelength_nm,density).
        spectrum_vv: Option<PathBuf>,
    },
    /// 36-setting state tomography with a maximum-likelihood fit.
    Tomography,
}

fn run(cli: &Cli) -> Result<ExitCode> {
    if cli.fixture.is_some() && cli.exact {
        return Err(config_error("--fixture and --exact are mutually exclusive"));
    }
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = Some(seed);
    }
    let mode = match (&cli.fixture, cli.exact) {
        (Some(path), _) => Mode::Fixture(path.clone()),
        (None, true) => Mode::Exact,
        (None, false) => Mode::Simulation,
    };

    let output: ExperimentOutput = match &cli.command {
        Command::Visibility => experiments::visibility::run(&cfg, &mode)?,
        Command::TangleSweep => experiments::sweep::run(&cfg, &mode)?,
        Command::Chsh => experiments::chsh::run(&cfg, &mode)?,
        Command::Bbell => experiments::bbell::run(&cfg, &mode)?,
        Command::Leggett => experiments::leggett::run(&cfg, &mode)?,
        Command::Overlap {
            spectrum_hh,
            spectrum_vv,
        } => experiments::overlap::run(&cfg, &mode, spectrum_hh.as_ref(), spectrum_vv.as_ref())?,
        Command::Tomography => experiments::tomo::run(&cfg, &mode)?,
    };

    print!("{}", output.report.render_text());

    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.directory.as_ref().map(PathBuf::from));
    if let Some(dir) = dir {
        write_outputs(&output, &dir, &cfg.output.formats)?;
    }

    // Fixture runs are decisive: failed reference checks are a distinct
    // exit status so scripts can gate on them.
    if matches!(mode, Mode::Fixture(_)) && !output.report.all_checks_pass() {
        eprintln!("fixture reference checks failed");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
