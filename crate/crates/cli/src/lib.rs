//! Batch experiment front end for `zml-core`: configuration files, the
//! experiment suite, parameter sweeps and CSV/plot emission.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{Config, ConfigError};
pub use experiment::{run_experiment, Command, ExperimentSpec};
