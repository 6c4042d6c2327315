//! Deterministic LMS vs PSO noise cancellation experiments.
//!
//! [`config::parse_config`] resolves a TOML document into an
//! [`ExperimentSpec`], [`run_experiment`] produces a [`ResultTable`] and
//! [`emit_csv`] writes it out with a metadata sidecar.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod seeds;

pub use config::{parse_config, DecisionOutput, ExperimentKind, ExperimentSpec};
pub use error::{BenchError, Result};
pub use output::{emit_csv, HistoryRow, MetricRow, ResultTable, Rows, StepRow};
pub use runner::{run_experiment, run_experiment_with_threads};
pub use seeds::RunSeeds;
