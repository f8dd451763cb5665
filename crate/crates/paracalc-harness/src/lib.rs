//! Configuration, experiment runners and reports for the paracalc command line.

pub mod config;
pub mod report;
pub mod runners;
pub mod svg;
pub mod threads;

pub use config::{ExperimentConfig, ExperimentKind};
pub use report::{Check, RunOutput, RunReport, Table};
pub use runners::run;
