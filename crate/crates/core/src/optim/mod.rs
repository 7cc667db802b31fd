//! The decentralized method, its single-node special case, the gradient
//! descent ascent baseline, and their schedules.

mod central;
mod dgdmax;
mod schedule;
mod state;

use thiserror::Error;

use crate::subsolver::SubsolverError;

pub use central::{gda_run, gdmax_run, pooled_argmax, CentralState, CentralTrace, Gda, GdMax};
pub use dgdmax::{DGdMax, DualSolver, RoundInfo};
pub use schedule::{
    default_delta, default_stepsizes, iteration_budget_t, DeltaSchedule, Schedule,
};
pub use state::NetworkState;

/// Runs abort once an iterate entry exceeds this magnitude.
pub const DIVERGENCE_LIMIT: f64 = 1e8;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("problem has no closed-form dual maximizer")]
    MissingOracle,
    #[error("iterates diverged at round {round}")]
    Diverged { round: usize },
    #[error("round {round}, agent {agent}: dual certificate {residual:.3e} above tolerance {delta:.3e} when the iteration budget ran out")]
    SubsolverBudget {
        round: usize,
        agent: usize,
        residual: f64,
        delta: f64,
    },
    #[error("round {round}, agent {agent}: {source}")]
    Subsolver {
        round: usize,
        agent: usize,
        source: SubsolverError,
    },
}
