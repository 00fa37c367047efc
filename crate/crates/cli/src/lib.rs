//! Configuration, experiment commands and CSV output for the `ilrep` binary.

pub mod commands;
pub mod config;
mod error;
pub mod output;

pub use config::{ExperimentConfig, Preset, RawConfig};
pub use error::CliError;
pub use output::ResultRow;
