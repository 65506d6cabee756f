//! Batch front end: tabulate kernels, run verification suites, sample ensembles and run
//! the SPDE Monte Carlo, writing CSV or JSON artifacts.

pub mod config;
pub mod emit;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use run::{run, Outcome, RunError};
