//! Harness for the OAM key-distribution simulator: scenario files,
//! subcommands and the CSV/JSON artifacts they write.

pub mod artifacts;
pub mod commands;
pub mod config;

pub use commands::{CliError, ExitStatus};
pub use config::{load_config, ScenarioConfig};
