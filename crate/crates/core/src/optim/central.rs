//! Single-node methods on the pooled objective `(1/m) sum_i f_i`.

use super::{DualSolver, OptimError, DIVERGENCE_LIMIT};
use crate::linalg::{axpy, max_abs};
use crate::metrics::prox_grad_mapping;
use crate::problem::MinimaxProblem;
use crate::subsolver::{apg_maximize, DualSubproblem};

/// Primal/dual pair of a centralized method after `t` iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralState {
    pub t: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Per-iteration gradient-mapping norms of a centralized run.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralTrace {
    /// Entry `t` is the measure at iterate `t`, for `t = 0..=T`.
    pub grad_mapping: Vec<f64>,
    pub last: CentralState,
}

fn mean_grad_y<P: MinimaxProblem + ?Sized>(p: &P, x: &[f64], y: &[f64]) -> Vec<f64> {
    let m = p.agents();
    let mut g = vec![0.0; p.dual_dim()];
    for i in 0..m {
        axpy(1.0 / m as f64, &p.grad_y(i, x, y), &mut g);
    }
    g
}

/// `argmax_y (1/m) sum_i f_i(x, y) - h(y)`.
pub fn pooled_argmax<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    warm: &[f64],
    solver: DualSolver,
    delta: f64,
) -> Result<(Vec<f64>, usize), OptimError> {
    let max_iters = match solver {
        DualSolver::Exact | DualSolver::Auto { .. } => {
            if let Some(y) = problem.pooled_exact_dual(x) {
                return Ok((y, 0));
            }
            match solver {
                DualSolver::Auto { max_iters } => max_iters,
                _ => return Err(OptimError::MissingOracle),
            }
        }
        DualSolver::Apg { max_iters } => max_iters,
    };
    let c = problem.constants();
    let sub = DualSubproblem::new(|y| mean_grad_y(problem, x, y), problem.dual_term(), c.mu, c.l_y);
    let r = apg_maximize(&sub, warm, delta, max_iters).map_err(|source| OptimError::Subsolver {
        round: 0,
        agent: 0,
        source,
    })?;
    if !r.converged {
        return Err(OptimError::SubsolverBudget {
            round: 0,
            agent: 0,
            residual: r.certified_residual,
            delta,
        });
    }
    Ok((r.y, r.iterations_used))
}

fn guard(x: &[f64], y: &[f64], round: usize) -> Result<(), OptimError> {
    let bad = |v: &[f64]| v.iter().any(|e| !e.is_finite()) || max_abs(v) > DIVERGENCE_LIMIT;
    if bad(x) || bad(y) {
        return Err(OptimError::Diverged { round });
    }
    Ok(())
}

/// Gradient descent with exact (or `delta`-accurate) dual maximization.
pub struct GdMax<'a, P: MinimaxProblem + ?Sized> {
    problem: &'a P,
    pub eta_x: f64,
    pub solver: DualSolver,
    /// Dual tolerance when the iterative solver is used.
    pub delta: f64,
}

impl<'a, P: MinimaxProblem + ?Sized> GdMax<'a, P> {
    pub fn new(problem: &'a P, eta_x: f64) -> Self {
        Self {
            problem,
            eta_x,
            solver: DualSolver::default(),
            delta: 1e-10,
        }
    }

    pub fn init(&self, x0: &[f64]) -> Result<CentralState, OptimError> {
        let warm = self.problem.dual_term().prox(&vec![0.0; self.problem.dual_dim()], 1.0);
        let (y, _) = pooled_argmax(self.problem, x0, &warm, self.solver, self.delta)?;
        Ok(CentralState {
            t: 0,
            x: x0.to_vec(),
            y,
        })
    }

    /// `x <- prox(x - eta grad_x f(x, y*(x)))`, then `y <- y*(x)`.
    pub fn step(&self, s: &CentralState) -> Result<CentralState, OptimError> {
        let g = self.problem.mean_grad_x(&s.x, &s.y);
        let z: Vec<f64> = s.x.iter().zip(&g).map(|(a, b)| a - self.eta_x * b).collect();
        let x = self.problem.prox_g(&z, self.eta_x);
        let (y, _) = pooled_argmax(self.problem, &x, &s.y, self.solver, self.delta)?;
        guard(&x, &y, s.t + 1)?;
        Ok(CentralState { t: s.t + 1, x, y })
    }

    /// `(1/eta) ||x - prox(x - eta grad p(x))||` at the current pair.
    pub fn grad_mapping(&self, s: &CentralState) -> f64 {
        let g = self.problem.mean_grad_x(&s.x, &s.y);
        prox_grad_mapping(self.problem, &s.x, self.eta_x, &g).expect("positive stepsize")
    }
}

/// `iters` iterations of [`GdMax`] from `x0`.
pub fn gdmax_run<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    eta_x: f64,
    iters: usize,
) -> Result<CentralTrace, OptimError> {
    let method = GdMax::new(problem, eta_x);
    let mut s = method.init(x0)?;
    let mut grad_mapping = vec![method.grad_mapping(&s)];
    for _ in 0..iters {
        s = method.step(&s)?;
        grad_mapping.push(method.grad_mapping(&s));
    }
    Ok(CentralTrace {
        grad_mapping,
        last: s,
    })
}

/// Simultaneous gradient descent ascent.
pub struct Gda<'a, P: MinimaxProblem + ?Sized> {
    problem: &'a P,
    pub eta_x: f64,
    pub eta_y: f64,
}

impl<'a, P: MinimaxProblem + ?Sized> Gda<'a, P> {
    pub fn new(problem: &'a P, eta_x: f64, eta_y: f64) -> Self {
        Self {
            problem,
            eta_x,
            eta_y,
        }
    }

    /// Both updates use the gradients at the current pair.
    pub fn step(&self, s: &CentralState) -> Result<CentralState, OptimError> {
        let gx = self.problem.mean_grad_x(&s.x, &s.y);
        let gy = mean_grad_y(self.problem, &s.x, &s.y);
        let zx: Vec<f64> = s.x.iter().zip(&gx).map(|(a, b)| a - self.eta_x * b).collect();
        let zy: Vec<f64> = s.y.iter().zip(&gy).map(|(a, b)| a + self.eta_y * b).collect();
        if zx.iter().chain(&zy).any(|v| !v.is_finite()) {
            return Err(OptimError::Diverged { round: s.t + 1 });
        }
        let x = self.problem.prox_g(&zx, self.eta_x);
        let y = self.problem.dual_term().prox(&zy, self.eta_y);
        guard(&x, &y, s.t + 1)?;
        Ok(CentralState { t: s.t + 1, x, y })
    }
}

/// `iters` iterations of [`Gda`] from `(x0, y0)`; records the gradient
/// mapping of the pooled primal function when its exact maximizer is
/// available and `||grad_x f(x, y)||` otherwise.
pub fn gda_run<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    y0: &[f64],
    eta_x: f64,
    eta_y: f64,
    iters: usize,
) -> Result<CentralTrace, OptimError> {
    let method = Gda::new(problem, eta_x, eta_y);
    let measure = |s: &CentralState| {
        let g = match problem.pooled_exact_dual(&s.x) {
            Some(y) => problem.mean_grad_x(&s.x, &y),
            None => problem.mean_grad_x(&s.x, &s.y),
        };
        prox_grad_mapping(problem, &s.x, eta_x, &g).expect("positive stepsize")
    };
    let mut s = CentralState {
        t: 0,
        x: x0.to_vec(),
        y: y0.to_vec(),
    };
    let mut grad_mapping = vec![measure(&s)];
    for _ in 0..iters {
        s = method.step(&s)?;
        grad_mapping.push(measure(&s));
    }
    Ok(CentralTrace {
        grad_mapping,
        last: s,
    })
}
