//! Command-line harness for the sliced Gibbs sampler: single runs, support
//! inspection, benchmark suites and LASSO posteriors.

pub mod app;
pub mod benchmark;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;
pub mod run;

pub use error::{CliError, CliResult};
