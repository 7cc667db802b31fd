//! Dual subproblem solvers: simplex projection, the closed-form robust
//! logistic regression maximizer, and a non-adaptive accelerated proximal
//! gradient method with a checkable stationarity certificate.

mod apg;
mod simplex;

use thiserror::Error;

use crate::problem::{DrlrInstance, MinimaxProblem, ProblemError};

pub use apg::{apg_maximize, certificate, theoretical_budget_s_t, DualSubproblem, SubsolveResult};
pub use simplex::project_simplex;

#[derive(Debug, Error)]
pub enum SubsolverError {
    #[error("empty input vector")]
    EmptyInput,
    #[error("input contains NaN or infinite entries")]
    NonFinite,
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("non-finite gradient at iteration {0}")]
    NonFiniteGradient(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Exact maximizer of agent `agent`'s local dual objective for the robust
/// logistic regression problem.
pub fn drlr_exact_dual(
    inst: &DrlrInstance,
    agent: usize,
    x: &[f64],
    lambda_tilde: &[f64],
    l: f64,
) -> Result<Vec<f64>, ProblemError> {
    if x.len() != inst.primal_dim() {
        return Err(ProblemError::DimensionMismatch {
            expected: inst.primal_dim(),
            got: x.len(),
        });
    }
    if lambda_tilde.len() != inst.dual_dim() {
        return Err(ProblemError::DimensionMismatch {
            expected: inst.dual_dim(),
            got: lambda_tilde.len(),
        });
    }
    Ok(inst
        .exact_dual(agent, x, lambda_tilde, l)
        .expect("closed form always available"))
}
