//! Experiment harness: configuration, seeding, run records, images and the
//! end-to-end experiments behind the command-line tool.

pub mod config;
pub mod experiments;
pub mod record;
pub mod render;

pub use config::ExperimentConfig;
pub use record::{Check, RunRecord};
