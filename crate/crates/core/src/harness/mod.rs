//! Simulation sweeps, metrics and the results file.

pub mod config;
mod experiment;
pub mod metrics;
mod results;

pub use experiment::{run_experiment, ExperimentConfig, MIN_HOLDOUT};
pub use metrics::{auc, logloss, mse};
pub use results::{ExperimentResult, Method, Metric, ResultRow, CSV_HEADER};
