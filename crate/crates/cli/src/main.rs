use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oamqkd_cli::commands::{self, CalibrateArgs, KeyrateArgs, RunArgs, SweepArgs};

/// OAM sector-state QKD simulator.
///
/// Exit codes: 0 success, 1 usage or configuration error, 2 decode errors,
/// 3 overlapping decision regions, 4 fringe-fit failure.
#[derive(Debug, Parser)]
#[command(name = "oamqkd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Calibrate, send a key stream and decode it.
    Run(RunArgs),
    /// Sweep Bob's angle over one period and fit the fringe.
    Sweep(SweepArgs),
    /// Build decision regions from training intervals.
    Calibrate(CalibrateArgs),
    /// Key-rate arithmetic for a given interval and alphabet.
    Keyrate(KeyrateArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            // clap exits with 2 on usage errors; 2 is reserved for decode errors
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(a) => commands::cmd_run(a),
        Command::Sweep(a) => commands::cmd_sweep(a),
        Command::Calibrate(a) => commands::cmd_calibrate(a),
        Command::Keyrate(a) => commands::cmd_keyrate(a),
    };
    match result {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
