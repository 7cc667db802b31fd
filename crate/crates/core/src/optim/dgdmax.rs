use rayon::prelude::*;

use super::{NetworkState, OptimError, Schedule, DIVERGENCE_LIMIT};
use crate::graph::MixingMatrix;
use crate::linalg::AgentMatrix;
use crate::problem::MinimaxProblem;
use crate::subsolver::{apg_maximize, DualSubproblem};

/// How each agent solves its dual subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualSolver {
    /// Closed-form maximizer; fails if the problem has none.
    Exact,
    /// Accelerated proximal gradient to the round tolerance.
    Apg { max_iters: usize },
    /// Closed form when available, otherwise accelerated proximal gradient.
    Auto { max_iters: usize },
}

impl Default for DualSolver {
    fn default() -> Self {
        Self::Auto { max_iters: 100_000 }
    }
}

/// Per-round bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RoundInfo {
    /// Subsolver iterations summed over agents (0 with the closed form).
    pub subsolver_iters: usize,
    /// Tolerance the dual iterates were solved to.
    pub delta: f64,
    /// Largest predicted iteration budget over agents, when reported.
    pub budget_s_t: Option<u64>,
}

/// Decentralized gradient descent maximization driver.
///
/// Holds no iterate state: [`init`](Self::init) and [`step`](Self::step)
/// map immutable snapshots to new ones.
pub struct DGdMax<'a, P: MinimaxProblem + ?Sized> {
    problem: &'a P,
    mixing: &'a MixingMatrix,
    schedule: Schedule,
    solver: DualSolver,
    parallel: bool,
}

struct AgentDual {
    y: Vec<f64>,
    iters: usize,
    budget: Option<u64>,
}

impl<'a, P: MinimaxProblem + ?Sized> DGdMax<'a, P> {
    pub fn new(problem: &'a P, mixing: &'a MixingMatrix, schedule: Schedule) -> Result<Self, OptimError> {
        if mixing.size() != problem.agents() {
            return Err(OptimError::DimensionMismatch {
                expected: problem.agents(),
                got: mixing.size(),
            });
        }
        Ok(Self {
            problem,
            mixing,
            schedule,
            solver: DualSolver::default(),
            parallel: false,
        })
    }

    pub fn with_solver(mut self, solver: DualSolver) -> Self {
        self.solver = solver;
        self
    }

    /// Fan per-agent work out to the rayon pool. Results are identical to
    /// the sequential path.
    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    fn per_agent<T: Send>(&self, f: impl Fn(usize) -> Result<T, OptimError> + Sync) -> Result<Vec<T>, OptimError> {
        let m = self.problem.agents();
        if self.parallel {
            (0..m).into_par_iter().map(|i| f(i)).collect()
        } else {
            (0..m).map(f).collect()
        }
    }

    fn solve_dual(
        &self,
        round: usize,
        agent: usize,
        x: &[f64],
        lambda_tilde: &[f64],
        warm: &[f64],
        delta: f64,
    ) -> Result<AgentDual, OptimError> {
        let l = self.problem.constants().l;
        let max_iters = match self.solver {
            DualSolver::Exact | DualSolver::Auto { .. } => {
                if let Some(y) = self.problem.exact_dual(agent, x, lambda_tilde, l) {
                    return Ok(AgentDual {
                        y,
                        iters: 0,
                        budget: None,
                    });
                }
                match self.solver {
                    DualSolver::Auto { max_iters } => max_iters,
                    _ => return Err(OptimError::MissingOracle),
                }
            }
            DualSolver::Apg { max_iters } => max_iters,
        };
        let sub = DualSubproblem::for_agent(self.problem, agent, x, lambda_tilde, l);
        let res = apg_maximize(&sub, warm, delta, max_iters).map_err(|source| OptimError::Subsolver {
            round,
            agent,
            source,
        })?;
        if !res.converged {
            return Err(OptimError::SubsolverBudget {
                round,
                agent,
                residual: res.certified_residual,
                delta,
            });
        }
        Ok(AgentDual {
            y: res.y,
            iters: res.iterations_used,
            budget: res.budget_s_t,
        })
    }

    fn solve_all(
        &self,
        round: usize,
        x: &AgentMatrix,
        lambda_tilde: &AgentMatrix,
        warm: &AgentMatrix,
    ) -> Result<(AgentMatrix, RoundInfo), OptimError> {
        let delta = self.schedule.delta.at(round);
        let duals = self.per_agent(|i| {
            self.solve_dual(round, i, x.row(i), lambda_tilde.row(i), warm.row(i), delta)
        })?;
        let info = RoundInfo {
            subsolver_iters: duals.iter().map(|d| d.iters).sum(),
            delta,
            budget_s_t: duals.iter().filter_map(|d| d.budget).max(),
        };
        Ok((AgentMatrix::from_rows(duals.into_iter().map(|d| d.y).collect()), info))
    }

    fn gradients(&self, x: &AgentMatrix, y: &AgentMatrix) -> Result<AgentMatrix, OptimError> {
        let rows = self.per_agent(|i| Ok(self.problem.grad_x(i, x.row(i), y.row(i))))?;
        Ok(AgentMatrix::from_rows(rows))
    }

    /// Round 0: every agent starts at `x0` with zero multipliers, solves its
    /// dual to the round-0 tolerance and sets its tracker to its own gradient.
    pub fn init(&self, x0: &[f64]) -> Result<(NetworkState, RoundInfo), OptimError> {
        let (m, n1, n2) = (self.problem.agents(), self.problem.primal_dim(), self.problem.dual_dim());
        if x0.len() != n1 {
            return Err(OptimError::DimensionMismatch {
                expected: n1,
                got: x0.len(),
            });
        }
        let x = AgentMatrix::broadcast(m, x0);
        let zeros = AgentMatrix::zeros(m, n2);
        let warm = AgentMatrix::broadcast(m, &self.problem.dual_term().prox(&vec![0.0; n2], 1.0));
        let (y, info) = self.solve_all(0, &x, &zeros, &warm)?;
        let grads = self.gradients(&x, &y)?;
        let state = NetworkState {
            t: 0,
            x,
            y,
            lambda: zeros.clone(),
            lambda_tilde: zeros,
            v: grads.clone(),
            grads,
        };
        Ok((state, info))
    }

    /// One communication round.
    pub fn step(&self, s: &NetworkState) -> Result<(NetworkState, RoundInfo), OptimError> {
        let round = s.t + 1;
        let w = self.mixing.weights();
        let l = self.problem.constants().l;
        let m = s.agents() as f64;
        let eta = self.schedule.eta_x;

        // (a) neighbor averaging, then a proximal step along the tracker.
        let x_mix = s.x.mix(w);
        let rows = self.per_agent(|i| {
            let z: Vec<f64> = x_mix
                .row(i)
                .iter()
                .zip(s.v.row(i))
                .map(|(a, v)| a - eta * v)
                .collect();
            Ok(self.problem.prox_g(&z, eta))
        })?;
        let x = AgentMatrix::from_rows(rows);

        // (b) multiplier ascent on the dual disagreement.
        let coef = l * self.schedule.eta_lambda / (2.0 * m.sqrt());
        let disagreement = s.y.mix(w).sub(&s.y);
        let lambda = s.lambda.add_scaled(coef, &disagreement);
        let lambda_tilde = lambda.mix_transpose(w).sub(&lambda);

        // (c) inexact dual maximization, warm-started.
        let (y, info) = self.solve_all(round, &x, &lambda_tilde, &s.y)?;

        // (d) gradient tracking.
        let grads = self.gradients(&x, &y)?;
        let v = s.v.mix(w).add_scaled(1.0, &grads).add_scaled(-1.0, &s.grads);

        let next = NetworkState {
            t: round,
            x,
            y,
            lambda,
            lambda_tilde,
            v,
            grads,
        };
        if !next.is_finite() || next.max_abs() > DIVERGENCE_LIMIT {
            return Err(OptimError::Diverged { round });
        }
        Ok((next, info))
    }
}
