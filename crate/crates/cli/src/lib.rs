//! Experiment runners behind the `qriopt` binary.
//!
//! Each runner takes an [`ExperimentConfig`], generates its problem from the
//! seed, optimizes it and returns [`Artifacts`]: a trace, a summary and any
//! extra files, which [`output::write_artifacts`] puts on disk.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{Cli, Experiment, ExperimentConfig};
pub use error::{CliError, CliResult};
pub use experiments::run_experiment;
pub use output::{Artifacts, Summary};
