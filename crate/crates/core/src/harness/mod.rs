//! Experiment configuration, synthetic data, trace files and grid search.

pub mod config;
mod data;
mod grid;
mod run;
mod trace;

use thiserror::Error;

pub use config::RunConfig;
pub use data::gen_synthetic;
pub use grid::{grid_search, parse_grid, Cell, CellResult, GridSummary, PAPER_STEPSIZES};
pub use run::{run_experiment, Experiment, RunOutcome, RunStatus};
pub use trace::{read_trace, TraceFile, TraceRow, TraceWriter, TRACE_COLUMNS};

use crate::graph::GraphError;
use crate::metrics::MetricsError;
use crate::optim::OptimError;
use crate::problem::ProblemError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
