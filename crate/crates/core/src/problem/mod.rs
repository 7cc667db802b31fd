//! Minimax problem abstraction and concrete instances.
//!
//! A problem is `min_x max_y (1/m) sum_i f_i(x, y) + g(x) - h(y)` spread over
//! `m` agents. Each agent evaluates its own `f_i`; the regularizers `g` and
//! `h` are shared and only accessed through their proximal maps.

mod dataset;
pub(crate) mod drlr;
mod minty;
mod quadratic;

use thiserror::Error;

pub use dataset::{
    parse_libsvm, partition_dataset, write_libsvm, Dataset, LibsvmOptions, Partition,
};
pub use drlr::{DrlrInstance, DrlrParams, LipschitzEstimate};
pub use minty::{minty_operator, minty_scan, MintyScan, ToyMinty};
pub use quadratic::{QuadraticAgent, QuadraticMinimax};

use crate::subsolver::project_simplex;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: feature index {index} is not strictly ascending")]
    NonAscending { line: usize, index: usize },
    #[error("line {line}: label `{label}` outside the accepted set")]
    BadLabel { line: usize, label: String },
    #[error("line {line}: feature index {index} exceeds declared dimension {dim}")]
    IndexOutOfRange {
        line: usize,
        index: usize,
        dim: usize,
    },
    #[error("cannot split {samples} samples among {agents} agents")]
    TooManyAgents { agents: usize, samples: usize },
    #[error("partition is not a disjoint cover of 0..{0}")]
    BadPartition(usize),
    #[error("agent {0} owns no samples")]
    EmptyPartition(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Smoothness and concavity moduli of a problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemConstants {
    /// Lipschitz constant of every `grad f_i` (jointly in `(x, y)`).
    pub l: f64,
    /// Strong-concavity modulus of every `f_i(x, .)`.
    pub mu: f64,
    /// Lipschitz constant of `grad_y f_i(x, .)`.
    pub l_y: f64,
}

impl ProblemConstants {
    pub fn kappa(&self) -> f64 {
        self.l / self.mu
    }

    pub fn kappa_y(&self) -> f64 {
        self.l_y / self.mu
    }
}

/// The primal regularizer `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrimalRegularizer {
    Zero,
    /// `g(x) = weight * ||x||_1`
    L1 { weight: f64 },
}

impl PrimalRegularizer {
    /// `prox_{eta g}(z)`
    pub fn prox(&self, z: &[f64], eta: f64) -> Vec<f64> {
        match *self {
            Self::Zero => z.to_vec(),
            Self::L1 { weight } => {
                let t = eta * weight;
                z.iter()
                    .map(|&v| v.signum() * (v.abs() - t).max(0.0))
                    .collect()
            }
        }
    }
}

/// The dual regularizer `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualTerm {
    /// `h = 0`
    Zero,
    /// Indicator of the probability simplex.
    Simplex,
    /// `h(y) = (weight / 2) ||y||^2`
    Quadratic { weight: f64 },
}

impl DualTerm {
    /// `argmin_y step * h(y) + 0.5 ||y - z||^2`
    pub fn prox(&self, z: &[f64], step: f64) -> Vec<f64> {
        match *self {
            Self::Zero => z.to_vec(),
            Self::Simplex => project_simplex(z).expect("finite, nonempty input to simplex prox"),
            Self::Quadratic { weight } => {
                let s = 1.0 / (1.0 + step * weight);
                z.iter().map(|v| v * s).collect()
            }
        }
    }

    /// Whether `y` lies in `dom(h)` up to `tol`.
    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        match self {
            Self::Simplex => {
                y.iter().all(|&v| v >= -tol) && (y.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            _ => y.iter().all(|v| v.is_finite()),
        }
    }
}

/// Capability contract of a decentralized minimax problem.
///
/// Gradient evaluators take `x` of length [`primal_dim`](Self::primal_dim)
/// and `y` of length [`dual_dim`](Self::dual_dim) and panic on other
/// lengths. Implementations are immutable and safe to share across threads.
pub trait MinimaxProblem: Sync {
    fn agents(&self) -> usize;
    fn primal_dim(&self) -> usize;
    fn dual_dim(&self) -> usize;
    fn constants(&self) -> ProblemConstants;

    /// `f_i(x, y)`
    fn value(&self, agent: usize, x: &[f64], y: &[f64]) -> f64;
    fn grad_x(&self, agent: usize, x: &[f64], y: &[f64]) -> Vec<f64>;
    fn grad_y(&self, agent: usize, x: &[f64], y: &[f64]) -> Vec<f64>;

    fn primal_regularizer(&self) -> PrimalRegularizer {
        PrimalRegularizer::Zero
    }

    fn dual_term(&self) -> DualTerm;

    /// Exact maximizer of the local dual objective
    /// `f_i(x, y) - h(y) - (l sqrt(m) / 2) <lambda_tilde, y>`, when a closed
    /// form exists.
    fn exact_dual(
        &self,
        _agent: usize,
        _x: &[f64],
        _lambda_tilde: &[f64],
        _l: f64,
    ) -> Option<Vec<f64>> {
        None
    }

    /// Exact maximizer of `(1/m) sum_i f_i(x, .) - h`, when available.
    fn pooled_exact_dual(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn prox_g(&self, z: &[f64], eta: f64) -> Vec<f64> {
        self.primal_regularizer().prox(z, eta)
    }

    /// `(1/m) sum_i grad_x f_i(x, y)`
    fn mean_grad_x(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let m = self.agents();
        let mut out = vec![0.0; self.primal_dim()];
        for i in 0..m {
            crate::linalg::axpy(1.0 / m as f64, &self.grad_x(i, x, y), &mut out);
        }
        out
    }
}
