//! Experiment runner for branching random walks with infinite-mean
//! offspring: configuration, parallel replicates and JSON/CSV reports.
//!
//! The numerics live in [`brwx_core`]; this crate adds IO and the command
//! line.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod report;

pub use config::{Displacement, Experiment, ExperimentConfig};
pub use experiments::run;
pub use report::{ExperimentReport, Status};
