//! Experiment configuration, simulation runner, CSV output and command line.

pub mod cli;
pub mod config;
pub mod output;
pub mod runner;

pub use config::ExperimentConfig;
pub use output::{fmt_sig9, write_results};
pub use runner::{reference_coefficients, run_experiment, ExperimentResults, ReferenceCoefficients, RegretTrace};
