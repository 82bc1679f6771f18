//! Experiment configuration and drivers.

pub mod config;
pub mod output;
pub mod run;

pub use config::{load_config, validate_config, ExperimentConfig, OutputFormat, Task};
pub use output::{read_rows, Kind};
pub use run::{run_config, RunControl, Summary};
