//! Config parsing and task execution behind the `gle` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, ConfigError, ExperimentConfig, Task};
pub use run::{run, RunError, RunOutcome};
