//! Quadratic minimax instances with closed-form inner maximizers.
//!
//! `f_i(x, y) = 1/2 x^T P_i x + x^T B_i y + c_i^T y - 1/2 y^T Q_i y` with
//! `Q_i` symmetric positive definite. `P_i` may be indefinite.

use nalgebra::{DMatrix, DVector};

use super::{DualTerm, MinimaxProblem, PrimalRegularizer, ProblemConstants, ProblemError};
use crate::rng::SeedStream;
use crate::subsolver::project_simplex;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticAgent {
    pub p: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DVector<f64>,
    pub q: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct QuadraticMinimax {
    agents: Vec<QuadraticAgent>,
    g: PrimalRegularizer,
    h: DualTerm,
    constants: ProblemConstants,
}

fn sym_eigen_range(a: &DMatrix<f64>) -> (f64, f64) {
    let ev = a.clone().symmetric_eigen().eigenvalues;
    (ev.min(), ev.max())
}

impl QuadraticMinimax {
    pub fn new(
        agents: Vec<QuadraticAgent>,
        g: PrimalRegularizer,
        h: DualTerm,
    ) -> Result<Self, ProblemError> {
        let first = agents
            .first()
            .ok_or_else(|| ProblemError::InvalidParameter("no agents".into()))?;
        let (n, d) = (first.p.nrows(), first.q.nrows());
        let mut l: f64 = 0.0;
        let mut mu = f64::INFINITY;
        let mut l_y: f64 = 0.0;
        for a in &agents {
            let shapes = [
                (a.p.nrows(), n),
                (a.p.ncols(), n),
                (a.b.nrows(), n),
                (a.b.ncols(), d),
                (a.c.len(), d),
                (a.q.nrows(), d),
                (a.q.ncols(), d),
            ];
            if let Some(&(got, expected)) = shapes.iter().find(|(g, e)| g != e) {
                return Err(ProblemError::DimensionMismatch { expected, got });
            }
            let (qmin, qmax) = sym_eigen_range(&a.q);
            if qmin <= 0.0 {
                return Err(ProblemError::InvalidParameter(
                    "dual curvature must be positive definite".into(),
                ));
            }
            mu = mu.min(qmin);
            l_y = l_y.max(qmax);
            let mut hess = DMatrix::zeros(n + d, n + d);
            hess.view_mut((0, 0), (n, n)).copy_from(&a.p);
            hess.view_mut((0, n), (n, d)).copy_from(&a.b);
            hess.view_mut((n, 0), (d, n)).copy_from(&a.b.transpose());
            hess.view_mut((n, n), (d, d)).copy_from(&(-&a.q));
            let (lo, hi) = sym_eigen_range(&hess);
            l = l.max(lo.abs()).max(hi.abs());
        }
        Ok(Self {
            agents,
            g,
            h,
            constants: ProblemConstants {
                l: l.max(l_y),
                mu,
                l_y,
            },
        })
    }

    /// Random instance: Gaussian `P_i`, `B_i`, `c_i` scaled by `coupling`, and
    /// `Q_i` with spectrum in `[mu, l_y]` attaining both ends.
    pub fn random(
        agents: usize,
        primal_dim: usize,
        dual_dim: usize,
        mu: f64,
        l_y: f64,
        coupling: f64,
        seed: u64,
        h: DualTerm,
    ) -> Result<Self, ProblemError> {
        if !(mu > 0.0 && l_y >= mu) {
            return Err(ProblemError::InvalidParameter(format!(
                "need 0 < mu <= l_y, got mu={mu}, l_y={l_y}"
            )));
        }
        let mut rng = SeedStream::new(seed);
        let mut gauss = |r: usize, c: usize, s: f64| DMatrix::from_fn(r, c, |_, _| s * rng.gaussian());
        let list = (0..agents)
            .map(|_| {
                let p0 = gauss(primal_dim, primal_dim, coupling / (primal_dim as f64).sqrt());
                let p = (&p0 + p0.transpose()) * 0.5;
                let b = gauss(primal_dim, dual_dim, coupling / (dual_dim as f64).sqrt());
                let c = gauss(dual_dim, 1, 1.0).column(0).into_owned();
                let u = gauss(dual_dim, dual_dim, 1.0).qr().q();
                let spread: Vec<f64> = (0..dual_dim)
                    .map(|k| {
                        if dual_dim == 1 {
                            mu
                        } else {
                            mu + (l_y - mu) * k as f64 / (dual_dim - 1) as f64
                        }
                    })
                    .collect();
                let q = &u * DMatrix::from_diagonal(&DVector::from_vec(spread)) * u.transpose();
                let q = (&q + q.transpose()) * 0.5;
                QuadraticAgent { p, b, c, q }
            })
            .collect();
        Self::new(list, PrimalRegularizer::Zero, h)
    }

    pub fn with_regularizer(mut self, g: PrimalRegularizer) -> Self {
        self.g = g;
        self
    }

    pub fn agent(&self, i: usize) -> &QuadraticAgent {
        &self.agents[i]
    }

    /// Maximizer of `<q, y> - 1/2 y^T Q y - h(y)` when it has a closed form.
    fn maximize(&self, q_mat: &DMatrix<f64>, lin: DVector<f64>) -> Option<Vec<f64>> {
        let d = lin.len();
        match self.h {
            DualTerm::Zero => q_mat.clone().cholesky().map(|c| c.solve(&lin).as_slice().to_vec()),
            DualTerm::Quadratic { weight } => (q_mat + DMatrix::identity(d, d) * weight)
                .cholesky()
                .map(|c| c.solve(&lin).as_slice().to_vec()),
            DualTerm::Simplex => {
                // Closed form only for isotropic curvature.
                let s = q_mat[(0, 0)];
                let iso = (q_mat - DMatrix::identity(d, d) * s).amax() == 0.0;
                iso.then(|| project_simplex(&(lin / s).as_slice().to_vec()).expect("finite"))
            }
        }
    }

    fn linear_term(&self, i: usize, x: &[f64]) -> DVector<f64> {
        let a = &self.agents[i];
        a.b.transpose() * DVector::from_column_slice(x) + &a.c
    }
}

impl MinimaxProblem for QuadraticMinimax {
    fn agents(&self) -> usize {
        self.agents.len()
    }

    fn primal_dim(&self) -> usize {
        self.agents[0].p.nrows()
    }

    fn dual_dim(&self) -> usize {
        self.agents[0].q.nrows()
    }

    fn constants(&self) -> ProblemConstants {
        self.constants
    }

    fn value(&self, agent: usize, x: &[f64], y: &[f64]) -> f64 {
        let a = &self.agents[agent];
        let xv = DVector::from_column_slice(x);
        let yv = DVector::from_column_slice(y);
        0.5 * xv.dot(&(&a.p * &xv)) + xv.dot(&(&a.b * &yv)) + a.c.dot(&yv)
            - 0.5 * yv.dot(&(&a.q * &yv))
    }

    fn grad_x(&self, agent: usize, x: &[f64], y: &[f64]) -> Vec<f64> {
        let a = &self.agents[agent];
        let g = &a.p * DVector::from_column_slice(x) + &a.b * DVector::from_column_slice(y);
        g.as_slice().to_vec()
    }

    fn grad_y(&self, agent: usize, x: &[f64], y: &[f64]) -> Vec<f64> {
        let a = &self.agents[agent];
        let g = self.linear_term(agent, x) - &a.q * DVector::from_column_slice(y);
        g.as_slice().to_vec()
    }

    fn primal_regularizer(&self) -> PrimalRegularizer {
        self.g
    }

    fn dual_term(&self) -> DualTerm {
        self.h
    }

    fn exact_dual(&self, agent: usize, x: &[f64], lambda_tilde: &[f64], l: f64) -> Option<Vec<f64>> {
        let k = 0.5 * l * (self.agents() as f64).sqrt();
        let lin = self.linear_term(agent, x) - DVector::from_column_slice(lambda_tilde) * k;
        self.maximize(&self.agents[agent].q, lin)
    }

    fn pooled_exact_dual(&self, x: &[f64]) -> Option<Vec<f64>> {
        let m = self.agents() as f64;
        let d = self.dual_dim();
        let mut q = DMatrix::zeros(d, d);
        let mut lin = DVector::zeros(d);
        for i in 0..self.agents() {
            q += &self.agents[i].q / m;
            lin += self.linear_term(i, x) / m;
        }
        self.maximize(&q, lin)
    }
}
