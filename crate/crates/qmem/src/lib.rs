//! Experiment harness: configuration, parallel ensembles, CSV and SVG output.

pub mod commands;
pub mod config;
pub mod ensemble;
pub mod experiment;
pub mod output;
pub mod plot;

pub use config::{ConfigError, ExperimentConfig, RouteChoice};
pub use ensemble::{default_workers, run_parallel, EnsembleError};
pub use experiment::{simulate, tabulate, write_outputs, SimError, ThetaRun};
pub use output::{read_ensemble_csv, read_trajectory_csv, write_ensemble_csv, write_trajectory_csv, EnsembleTable};
