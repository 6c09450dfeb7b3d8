use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gpe_cli::Mode;

#[derive(Parser)]
#[command(
    name = "gpe",
    version,
    about = "Gross-Pitaevskii ground states, dynamics and excitations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Nonrotating ground state by gradient flow.
    Groundstate(RunArgs),
    /// Ground state in a rotating frame.
    GroundstateRotating(RunArgs),
    /// Time-splitting dynamics.
    Evolve(RunArgs),
    /// Dynamics in a rotating trap (rotating Lagrangian frame).
    EvolveRotating(RunArgs),
    /// Dynamics with dipolar interaction.
    EvolveDipolar(RunArgs),
    /// Two-component spin-orbit-coupled dynamics.
    EvolveCgpe(RunArgs),
    /// Bogoliubov excitations of a 1D ground state.
    Bdg(RunArgs),
    /// Temporal order of the splitting from a sequence of time steps.
    ConvergenceStudy(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Single-threaded run without wall-clock figures, for byte-identical reruns.
    #[arg(long)]
    deterministic: bool,
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Groundstate(a) => (Mode::Groundstate, a),
        Command::GroundstateRotating(a) => (Mode::GroundstateRotating, a),
        Command::Evolve(a) => (Mode::Evolve, a),
        Command::EvolveRotating(a) => (Mode::EvolveRotating, a),
        Command::EvolveDipolar(a) => (Mode::EvolveDipolar, a),
        Command::EvolveCgpe(a) => (Mode::EvolveCgpe, a),
        Command::Bdg(a) => (Mode::Bdg, a),
        Command::ConvergenceStudy(a) => (Mode::ConvergenceStudy, a),
    };
    let level = match args.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    let code = gpe_cli::run(mode, &args.config, args.out, args.deterministic);
    ExitCode::from(code as u8)
}
