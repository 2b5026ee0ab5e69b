//! Command-line front end for the tpef toolkit.
//!
//! `tpef` wires the forward models and inference routines of `tpef-core`
//! into five subcommands: `simulate` (forward-model a photon-counting
//! sweep), `fit` (power-law, linear-plus-quadratic, and thermal-activation
//! fits with plot-ready curves), `derive` (cross sections with
//! uncertainties), `discriminate` (pump-versus-attenuation mechanism
//! classification), and `spectrum` (spectrum utilities).
//!
//! Every subcommand writes a versioned `report.json` whose configuration
//! echo reproduces the run. Exit codes: 0 success, 1 usage/config error,
//! 2 numerical failure; failures are also emitted on stderr as single-line
//! JSON records.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod report;

use clap::Parser;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "tpef",
    version,
    about = "Forward models and inference for weak two-photon-excited fluorescence",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Simulate a photon-counting sweep from a run configuration.
    Simulate(commands::simulate::SimulateArgs),
    /// Fit a series and emit a plot-ready fit curve.
    Fit(commands::fit::FitArgs),
    /// Derive a cross section from a sweep and its run configuration.
    Derive(commands::derive::DeriveArgs),
    /// Classify the excitation mechanism from a pump/attenuation pair.
    Discriminate(commands::discriminate::DiscriminateArgs),
    /// Spectrum utilities.
    #[command(subcommand)]
    Spectrum(commands::spectrum::SpectrumCmd),
}

/// Parses `argv` and runs the requested command, returning the process
/// exit code. Errors are emitted on stderr as single-line JSON records.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                print!("{err}");
                return 0;
            }
            let usage = CliError::usage(err.to_string().trim().replace('\n', "; "));
            eprintln!("{}", usage.to_json_line());
            return usage.exit_code;
        }
    };
    let result = match &cli.command {
        Command::Simulate(args) => commands::simulate::run(args, &argv),
        Command::Fit(args) => commands::fit::run(args, &argv),
        Command::Derive(args) => commands::derive::run(args, &argv),
        Command::Discriminate(args) => commands::discriminate::run(args, &argv),
        Command::Spectrum(cmd) => commands::spectrum::run(cmd, &argv),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", err.to_json_line());
            err.exit_code
        }
    }
}
