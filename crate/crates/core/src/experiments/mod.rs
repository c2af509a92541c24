//! Scenario runners, configuration, persistence and reports.

pub mod checkpoint;
pub mod config;
pub mod output;
pub mod runners;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointError};
pub use config::{ExperimentConfig, Scenario};
pub use output::{Check, Report, Status};
pub use runners::run_experiment;
