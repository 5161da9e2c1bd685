use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qrps_cli::commands::{
    run_dpc_curve, run_simulate, run_sweep, DpcArgs, SimulateArgs, SweepArgs,
};

/// Capacity-distortion sweeps, dirty-paper curves and coding simulations for
/// random-parameter quantum channels.
#[derive(Parser)]
#[command(name = "qrps", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the rate at each distortion budget and write a frontier CSV.
    Sweep(SweepArgs),
    /// Sample the bosonic dirty-paper rate over the coefficient t.
    DpcCurve(DpcArgs),
    /// Monte-Carlo run of a coding scheme over a measurement channel.
    Simulate(SimulateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut err = std::io::stderr();
    let res = match &cli.command {
        Command::Sweep(a) => run_sweep(a, &mut err).map(drop),
        Command::DpcCurve(a) => run_dpc_curve(a, &mut err).map(drop),
        Command::Simulate(a) => run_simulate(a, &mut err).map(drop),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
