//! Desk-scale twin experiments on top of `rtt-core`: configuration, the
//! consistency suites, calibration, convergence-rate and fixed-α PGN studies.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod study;

pub use config::ExperimentConfig;
pub use error::{ExperimentError, Result};
