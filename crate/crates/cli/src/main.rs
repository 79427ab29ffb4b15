//! `rydtc` — stroboscopic simulation of a periodically driven ring of
//! Rydberg two-level atoms: trajectories, subharmonic spectra, detuning
//! scans, (ε, L) phase maps, dissipative decay fits, and a closed-form
//! cross-check of the evolution engine.

mod commands;
mod config;
mod error;
mod output;
mod svg;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "rydtc",
    version,
    about = "Simulate the period-doubled response of a driven Rydberg ring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one parameter point and emit the P/Q trajectory
    Simulate(commands::SimulateArgs),
    /// Fourier-transform a trajectory and emit the response spectrum
    Spectrum(commands::SpectrumArgs),
    /// Sweep a detuning grid for the breakdown cycle n_c
    Scan(commands::ScanArgs),
    /// Classify δn_c over an (ε, L) grid
    PhaseDiagram(commands::PhaseDiagramArgs),
    /// Evolve a density matrix with spontaneous decay and fit the envelope
    Dissipative(commands::DissipativeArgs),
    /// Cross-check the engine against the few-atom closed forms
    OracleCheck(commands::OracleCheckArgs),
}

fn main() {
    // A single BLAS thread keeps runs bit-reproducible regardless of the
    // host; parallelism lives at the sweep-point level instead.
    std::env::set_var("OPENBLAS_NUM_THREADS", "1");

    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Spectrum(args) => commands::spectrum(args),
        Command::Scan(args) => commands::scan(args),
        Command::PhaseDiagram(args) => commands::phase_diagram_cmd(args),
        Command::Dissipative(args) => commands::dissipative(args),
        Command::OracleCheck(args) => commands::oracle_check(args),
    };
    match result {
        Ok(()) => {}
        Err(err) => {
            eprintln!("{}: {err}", err.label());
            std::process::exit(err.exit_code());
        }
    }
}
