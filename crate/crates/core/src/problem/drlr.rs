//! Distributionally robust logistic regression.
//!
//! Agent `i` owns the samples `J_i` and evaluates
//!
//! ```text
//! f_i(x, y) = m * sum_{j in J_i} y_j * loss_j(x) + V_x(x) - V_y(y)
//! loss_j(x) = log(1 + exp(-b_j <a_j, x>))
//! V_x(x)    = beta_x * sum_k alpha x_k^2 / (1 + alpha x_k^2)
//! V_y(y)    = beta_y / 2 * ||y - 1/N||^2
//! ```
//!
//! with `h` the indicator of the probability simplex and `g = 0`, so that the
//! agent average recovers the pooled robust objective.

use super::{Dataset, DualTerm, MinimaxProblem, Partition, ProblemConstants, ProblemError};
use crate::linalg::{dot, norm2};
use crate::rng::SeedStream;
use crate::subsolver::project_simplex;

/// Shape and weight parameters of the robust objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrlrParams {
    pub alpha: f64,
    pub beta_x: f64,
    /// Weight of the proximity term; also the strong-concavity modulus.
    pub beta_y: f64,
    /// Radius of the `x`-ball sampled by the empirical smoothness check.
    pub radius: f64,
    /// Seed of the sampled smoothness check.
    pub sample_seed: u64,
}

impl Default for DrlrParams {
    fn default() -> Self {
        Self {
            alpha: 10.0,
            beta_x: 1e-3,
            beta_y: 0.1,
            radius: 10.0,
            sample_seed: 0x1ab5_c0de,
        }
    }
}

/// Smoothness bound of the agent gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzEstimate {
    /// Worst-case Hessian norm bound over `x` in `R^n`, `y` in the simplex.
    pub analytic: f64,
    /// Largest Hessian norm found by power iteration at sampled points.
    pub sampled: f64,
    /// `max(analytic, sampled)`; the value used as `L`.
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct DrlrInstance {
    data: Dataset,
    partition: Partition,
    params: DrlrParams,
    lipschitz: LipschitzEstimate,
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl DrlrInstance {
    pub fn new(data: Dataset, partition: Partition, params: DrlrParams) -> Result<Self, ProblemError> {
        if !(params.beta_y > 0.0 && params.beta_y.is_finite()) {
            return Err(ProblemError::InvalidParameter(format!(
                "beta_y must be positive, got {}",
                params.beta_y
            )));
        }
        if !(params.beta_x >= 0.0 && params.alpha >= 0.0 && params.radius > 0.0) {
            return Err(ProblemError::InvalidParameter(
                "need beta_x >= 0, alpha >= 0, radius > 0".into(),
            ));
        }
        let partition = Partition::new(partition.sets().to_vec(), data.sample_count())?;
        if let Some(i) = partition.sets().iter().position(Vec::is_empty) {
            return Err(ProblemError::EmptyPartition(i));
        }
        let mut inst = Self {
            data,
            partition,
            params,
            lipschitz: LipschitzEstimate {
                analytic: 0.0,
                sampled: 0.0,
                value: 0.0,
            },
        };
        let analytic = inst.analytic_lipschitz();
        let sampled = inst.sampled_lipschitz(8, 60);
        inst.lipschitz = LipschitzEstimate {
            analytic,
            sampled,
            value: analytic.max(sampled),
        };
        Ok(inst)
    }

    /// One agent owning the whole dataset.
    pub fn centralized(data: Dataset, params: DrlrParams) -> Result<Self, ProblemError> {
        let p = Partition::single(data.sample_count());
        Self::new(data, p, params)
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn params(&self) -> &DrlrParams {
        &self.params
    }

    pub fn lipschitz(&self) -> LipschitzEstimate {
        self.lipschitz
    }

    /// Same data and partition with a new `beta_y` (smoothness re-estimated).
    pub fn with_beta_y(&self, beta_y: f64) -> Result<Self, ProblemError> {
        let params = DrlrParams { beta_y, ..self.params };
        Self::new(self.data.clone(), self.partition.clone(), params)
    }

    fn margin(&self, j: usize, x: &[f64]) -> f64 {
        -self.data.label(j) * self.data.dot_row(j, x)
    }

    /// Logistic loss of every sample at `x`.
    pub fn losses(&self, x: &[f64]) -> Vec<f64> {
        (0..self.data.sample_count())
            .map(|j| softplus(self.margin(j, x)))
            .collect()
    }

    pub fn v_x(&self, x: &[f64]) -> f64 {
        let DrlrParams { alpha, beta_x, .. } = self.params;
        beta_x * x.iter().map(|&v| alpha * v * v / (1.0 + alpha * v * v)).sum::<f64>()
    }

    fn v_x_grad(&self, x: &[f64]) -> Vec<f64> {
        let DrlrParams { alpha, beta_x, .. } = self.params;
        x.iter()
            .map(|&v| {
                let d = 1.0 + alpha * v * v;
                beta_x * 2.0 * alpha * v / (d * d)
            })
            .collect()
    }

    fn v_x_curvature(&self, v: f64) -> f64 {
        let DrlrParams { alpha, beta_x, .. } = self.params;
        let d = 1.0 + alpha * v * v;
        beta_x * 2.0 * alpha * (1.0 - 3.0 * alpha * v * v) / (d * d * d)
    }

    pub fn v_y(&self, y: &[f64]) -> f64 {
        let c = 1.0 / y.len() as f64;
        0.5 * self.params.beta_y * y.iter().map(|v| (v - c) * (v - c)).sum::<f64>()
    }

    fn check_dims(&self, x: &[f64], y: &[f64]) -> Result<(), ProblemError> {
        if x.len() != self.data.feature_dim() {
            return Err(ProblemError::DimensionMismatch {
                expected: self.data.feature_dim(),
                got: x.len(),
            });
        }
        if y.len() != self.data.sample_count() {
            return Err(ProblemError::DimensionMismatch {
                expected: self.data.sample_count(),
                got: y.len(),
            });
        }
        Ok(())
    }

    pub fn try_grad_x(&self, agent: usize, x: &[f64], y: &[f64]) -> Result<Vec<f64>, ProblemError> {
        self.check_dims(x, y)?;
        Ok(self.grad_x(agent, x, y))
    }

    pub fn try_grad_y(&self, agent: usize, x: &[f64], y: &[f64]) -> Result<Vec<f64>, ProblemError> {
        self.check_dims(x, y)?;
        Ok(self.grad_y(agent, x, y))
    }

    /// Joint Hessian-vector product of `f_i` at `(x, y)` applied to `(u, w)`.
    pub fn hessian_vec(
        &self,
        agent: usize,
        x: &[f64],
        y: &[f64],
        u: &[f64],
        w: &[f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let m = self.agents() as f64;
        let mut hx: Vec<f64> = x
            .iter()
            .zip(u)
            .map(|(&xk, &uk)| self.v_x_curvature(xk) * uk)
            .collect();
        let mut hy: Vec<f64> = w.iter().map(|v| -self.params.beta_y * v).collect();
        for &j in self.partition.set(agent) {
            let s = sigmoid(self.margin(j, x));
            let b = self.data.label(j);
            let au = self.data.dot_row(j, u);
            // d loss / dx = -b s a, d^2 loss / dx^2 = s (1 - s) a a^T
            let coef = m * (y[j] * s * (1.0 - s) * au - b * s * w[j]);
            self.data.add_row_scaled(j, coef, &mut hx);
            hy[j] += -m * b * s * au;
        }
        (hx, hy)
    }

    /// Bound on the joint Hessian norm for `y` in the simplex:
    /// `max(||H_xx||, beta_y) + ||H_xy||` with
    /// `||H_xx|| <= m max_j ||a_j||^2 / 4 + 2 alpha beta_x` and
    /// `||H_xy|| <= m ||A_i||_2`.
    fn analytic_lipschitz(&self) -> f64 {
        let m = self.agents() as f64;
        let DrlrParams {
            alpha,
            beta_x,
            beta_y,
            ..
        } = self.params;
        (0..self.agents())
            .map(|i| {
                let set = self.partition.set(i);
                let max_row = set
                    .iter()
                    .map(|&j| self.data.row_norm_sq(j))
                    .fold(0.0, f64::max);
                let hxx = m * max_row / 4.0 + 2.0 * alpha * beta_x;
                let cross = m * self.block_norm(set) * (1.0 + 1e-6);
                hxx.max(beta_y) + cross
            })
            .fold(0.0, f64::max)
    }

    /// Spectral norm of the rows `set` of the feature matrix, by power
    /// iteration on the Gram matrix.
    fn block_norm(&self, set: &[usize]) -> f64 {
        let n = self.data.feature_dim();
        if n == 0 {
            return 0.0;
        }
        let mut rng = SeedStream::new(self.params.sample_seed ^ 0xb10c);
        let mut v: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
        let mut theta = 0.0;
        for _ in 0..5_000 {
            let nv = norm2(&v);
            if nv == 0.0 {
                return 0.0;
            }
            v.iter_mut().for_each(|e| *e /= nv);
            let mut w = vec![0.0; n];
            for &j in set {
                let c = self.data.dot_row(j, &v);
                self.data.add_row_scaled(j, c, &mut w);
            }
            let next = dot(&v, &w);
            let done = (next - theta).abs() <= 1e-12 * next.abs();
            theta = next;
            v = w;
            if done {
                break;
            }
        }
        theta.max(0.0).sqrt()
    }

    /// Largest `||H v|| / ||v||` found by power iteration at `samples` random
    /// points per agent: `x` uniform in the radius ball, `y` uniform on the
    /// simplex.
    fn sampled_lipschitz(&self, samples: usize, iters: usize) -> f64 {
        let n = self.data.feature_dim();
        let big_n = self.data.sample_count();
        let mut rng = SeedStream::new(self.params.sample_seed);
        let mut best: f64 = 0.0;
        for i in 0..self.agents() {
            for _ in 0..samples {
                let x = random_ball_point(&mut rng, n, self.params.radius);
                let y = random_simplex_point(&mut rng, big_n);
                let mut u: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
                let mut w: Vec<f64> = (0..big_n).map(|_| rng.gaussian()).collect();
                for _ in 0..iters {
                    let norm = (dot(&u, &u) + dot(&w, &w)).sqrt();
                    if norm == 0.0 {
                        break;
                    }
                    u.iter_mut().chain(w.iter_mut()).for_each(|e| *e /= norm);
                    let (hu, hw) = self.hessian_vec(i, &x, &y, &u, &w);
                    best = best.max((dot(&hu, &hu) + dot(&hw, &hw)).sqrt());
                    u = hu;
                    w = hw;
                }
            }
        }
        best
    }

    /// Dual shift `c` of agent `i`: `m * loss_j` on owned samples minus
    /// `(l sqrt(m) / 2) lambda_tilde`.
    fn dual_shift(&self, agent: usize, x: &[f64], lambda_tilde: &[f64], l: f64) -> Vec<f64> {
        let m = self.agents() as f64;
        let k = 0.5 * l * m.sqrt();
        let mut c: Vec<f64> = lambda_tilde.iter().map(|v| -k * v).collect();
        for &j in self.partition.set(agent) {
            c[j] += m * softplus(self.margin(j, x));
        }
        c
    }
}

pub(crate) fn random_ball_point(rng: &mut SeedStream, n: usize, radius: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
    let norm = norm2(&x);
    let r = radius * rng.next_f64().powf(1.0 / n.max(1) as f64);
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v *= r / norm);
    }
    x
}

/// Uniform point on the simplex via normalized exponentials.
pub(crate) fn random_simplex_point(rng: &mut SeedStream, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.next_f64()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

impl MinimaxProblem for DrlrInstance {
    fn agents(&self) -> usize {
        self.partition.agents()
    }

    fn primal_dim(&self) -> usize {
        self.data.feature_dim()
    }

    fn dual_dim(&self) -> usize {
        self.data.sample_count()
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants {
            l: self.lipschitz.value,
            mu: self.params.beta_y,
            l_y: self.params.beta_y,
        }
    }

    fn value(&self, agent: usize, x: &[f64], y: &[f64]) -> f64 {
        let m = self.agents() as f64;
        let weighted: f64 = self
            .partition
            .set(agent)
            .iter()
            .map(|&j| y[j] * softplus(self.margin(j, x)))
            .sum();
        m * weighted + self.v_x(x) - self.v_y(y)
    }

    fn grad_x(&self, agent: usize, x: &[f64], y: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.primal_dim(), "x has wrong length");
        assert_eq!(y.len(), self.dual_dim(), "y has wrong length");
        let m = self.agents() as f64;
        let mut g = self.v_x_grad(x);
        for &j in self.partition.set(agent) {
            if y[j] != 0.0 {
                let s = sigmoid(self.margin(j, x));
                self.data
                    .add_row_scaled(j, -m * y[j] * self.data.label(j) * s, &mut g);
            }
        }
        g
    }

    fn grad_y(&self, agent: usize, x: &[f64], y: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.primal_dim(), "x has wrong length");
        assert_eq!(y.len(), self.dual_dim(), "y has wrong length");
        let m = self.agents() as f64;
        let c = 1.0 / y.len() as f64;
        let mut g: Vec<f64> = y.iter().map(|v| -self.params.beta_y * (v - c)).collect();
        for &j in self.partition.set(agent) {
            g[j] += m * softplus(self.margin(j, x));
        }
        g
    }

    fn dual_term(&self) -> DualTerm {
        DualTerm::Simplex
    }

    fn exact_dual(&self, agent: usize, x: &[f64], lambda_tilde: &[f64], l: f64) -> Option<Vec<f64>> {
        let c = self.dual_shift(agent, x, lambda_tilde, l);
        Some(shifted_uniform_projection(&c, self.params.beta_y))
    }

    fn pooled_exact_dual(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(shifted_uniform_projection(&self.losses(x), self.params.beta_y))
    }
}

/// `Proj_simplex(1/N + c / beta_y)`, the maximizer of
/// `<c, y> - beta_y/2 ||y - 1/N||^2` over the simplex.
fn shifted_uniform_projection(c: &[f64], beta_y: f64) -> Vec<f64> {
    let base = 1.0 / c.len() as f64;
    let z: Vec<f64> = c.iter().map(|v| base + v / beta_y).collect();
    project_simplex(&z).expect("finite dual shift")
}
