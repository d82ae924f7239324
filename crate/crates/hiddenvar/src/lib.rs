//! Command-line front end, file formats and parallel Monte Carlo for
//! `hiddenvar-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;

pub use error::CliError;
