//! Experiment runner for the `tvdual` library: configs, trace files,
//! bound reports, graph summaries and seed sweeps.

// `!(x > 0.0)` style checks reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod run;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use run::{execute, Execution, Summary};
