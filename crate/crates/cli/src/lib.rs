//! Command-line harness for `influence-core`: JSON function specs, CSV/JSON
//! output and the `influence` subcommands.

pub mod commands;
pub mod output;
pub mod spec_json;

pub use commands::{execute, run, Cli, Command};
