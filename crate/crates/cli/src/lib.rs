//! Command-line front end of `srgeo`: classification, simulation with
//! integral records, property verification, parameter scans and pendulum
//! phase portraits.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 runtime or integration failure.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use args::Cli;
pub use commands::run;
pub use error::CliError;
