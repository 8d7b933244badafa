use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pcbath_core::config::ExperimentConfig;
use pcbath_core::experiment::{cmd_db_contour, cmd_dos, cmd_sparams, cmd_ssmap, cmd_trajectory};
use pcbath_core::Error;

/// Bath engineering of a driven qubit behind a microwave photonic crystal.
#[derive(Debug, Parser)]
#[command(name = "pcbath", version)]
struct Cli {
    /// TOML config overlaying the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Replace the crystal with a frequency-independent bath.
    #[arg(long, global = true)]
    flat_dos: bool,

    /// Tomography seed (overrides `tomography.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scattering parameters of the crystal and its stop band.
    Sparams,
    /// Density of states, qubit decay rate and Rabi proxy versus qubit frequency.
    Dos,
    /// Steady-state Bloch vectors over the drive grid, plus the balance contour.
    Ssmap,
    /// Bloch vector versus time from the ground state.
    Trajectory {
        /// Rabi frequency Ω/2π in Hz.
        #[arg(long)]
        rabi: Option<f64>,
        /// Detuning Δ/2π = (ω_d − ω_q)/2π in Hz.
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
    },
    /// Drive amplitude of exact up/down balance for each detuning.
    DbContour,
}

fn load(cli: &Cli) -> pcbath_core::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::defaults(),
    };
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.tomography.seed = seed;
    }
    if let Command::Trajectory { rabi, delta } = &cli.command {
        if let Some(r) = rabi {
            cfg.trajectory.rabi_hz = *r;
        }
        if let Some(d) = delta {
            cfg.trajectory.delta_hz = *d;
        }
        cfg.validate()?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> pcbath_core::Result<()> {
    let cfg = load(cli)?;
    match cli.command {
        Command::Sparams => {
            let s = cmd_sparams(&cfg)?;
            println!("wrote {} ({} points)", s.path.display(), s.points);
            println!(
                "min |s21| = {:.2} dB at {:.4} GHz; max unitarity error {:.2e}",
                s.min_s21_db,
                s.min_s21_freq_hz * 1e-9,
                s.max_unitarity_error
            );
            match s.stop_band {
                Some(b) => println!(
                    "stop band {:.4}-{:.4} GHz (-3 dB of pass-band mean), depth {:.1} dB",
                    b.lower_edge_hz * 1e-9,
                    b.upper_edge_hz * 1e-9,
                    b.depth_db
                ),
                None => println!("no stop band found"),
            }
        }
        Command::Dos => {
            let s = cmd_dos(&cfg)?;
            println!("wrote {} ({} points)", s.path.display(), s.points);
        }
        Command::Ssmap => {
            let s = cmd_ssmap(&cfg, cli.flat_dos)?;
            println!(
                "wrote {} ({} points, {} failed)",
                s.path.display(),
                s.points,
                s.failures
            );
            println!("wrote {} ({} balance points)", s.contour_path.display(), s.contour_roots);
        }
        Command::Trajectory { .. } => {
            let (path, n) = cmd_trajectory(&cfg, cli.flat_dos)?;
            println!("wrote {} ({} samples)", path.display(), n);
        }
        Command::DbContour => {
            let (path, roots) = cmd_db_contour(&cfg, cli.flat_dos)?;
            println!("wrote {} ({} balance points)", path.display(), roots);
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config_error() {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
