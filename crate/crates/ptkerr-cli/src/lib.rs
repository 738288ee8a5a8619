//! Scenario runner for the `ptkerr` library: configuration, engine dispatch,
//! parameter sweeps, series comparison and figure presets.

pub mod cli;
pub mod compare;
pub mod config;
pub mod engine;
pub mod error;
pub mod figures;
pub mod output;
pub mod sweep;

pub use error::{CliError, CliResult};
