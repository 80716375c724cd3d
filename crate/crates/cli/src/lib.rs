//! Configuration parsing and command dispatch for the `h1count` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, RunConfig};
pub use run::{run, Outcome, RunError};
