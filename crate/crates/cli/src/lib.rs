//! Command-line front end: scenario files, subcommands, CSV/JSON output.

pub mod cli;
pub mod commands;
pub mod output;
pub mod scenario_file;
