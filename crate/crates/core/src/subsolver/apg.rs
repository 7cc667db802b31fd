use super::SubsolverError;
use crate::linalg::{dot, norm2};
use crate::problem::{DualTerm, MinimaxProblem};

type GradFn<'a> = Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + 'a>;
type ValueFn<'a> = Box<dyn Fn(&[f64]) -> f64 + Sync + 'a>;

/// `max_y s(y) - h(y)` with `s` smooth and `mu`-strongly concave.
pub struct DualSubproblem<'a> {
    grad: GradFn<'a>,
    value: Option<ValueFn<'a>>,
    pub h: DualTerm,
    pub mu: f64,
    pub l_y: f64,
}

impl<'a> DualSubproblem<'a> {
    pub fn new(
        grad: impl Fn(&[f64]) -> Vec<f64> + Sync + 'a,
        h: DualTerm,
        mu: f64,
        l_y: f64,
    ) -> Self {
        Self {
            grad: Box::new(grad),
            value: None,
            h,
            mu,
            l_y,
        }
    }

    /// Attach `s(y)`; used only to report the theoretical iteration budget.
    pub fn with_value(mut self, value: impl Fn(&[f64]) -> f64 + Sync + 'a) -> Self {
        self.value = Some(Box::new(value));
        self
    }

    /// Local dual objective of `agent` with smooth part
    /// `s(y) = f_i(x, y) - (l sqrt(m) / 2) <lambda_tilde, y>`.
    pub fn for_agent<P: MinimaxProblem + ?Sized>(
        problem: &'a P,
        agent: usize,
        x: &'a [f64],
        lambda_tilde: &'a [f64],
        l: f64,
    ) -> Self {
        let k = 0.5 * l * (problem.agents() as f64).sqrt();
        let c = problem.constants();
        Self::new(
            move |y| {
                let mut g = problem.grad_y(agent, x, y);
                for (gj, lj) in g.iter_mut().zip(lambda_tilde) {
                    *gj -= k * lj;
                }
                g
            },
            problem.dual_term(),
            c.mu,
            c.l_y,
        )
        .with_value(move |y| problem.value(agent, x, y) - k * dot(lambda_tilde, y))
    }

    pub fn grad(&self, y: &[f64]) -> Vec<f64> {
        (self.grad)(y)
    }

    fn objective(&self, y: &[f64]) -> Option<f64> {
        let v = self.value.as_ref()?(y);
        let h = match self.h {
            DualTerm::Zero => 0.0,
            DualTerm::Simplex if self.h.contains(y, 1e-12) => 0.0,
            DualTerm::Simplex => return None,
            DualTerm::Quadratic { weight } => 0.5 * weight * dot(y, y),
        };
        Some(v - h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsolveResult {
    pub y: Vec<f64>,
    /// Norm of an element of the subdifferential of the objective at `y`.
    pub certified_residual: f64,
    pub iterations_used: usize,
    pub converged: bool,
    /// Iteration count predicted by the complexity bound, when a gap
    /// estimate was available. Reported only.
    pub budget_s_t: Option<u64>,
}

/// Subgradient witness at the prox output `y_plus` computed from the point
/// `w` it was stepped from:
/// `l_y (y_plus - w) + grad s(y_plus) - grad s(w)`, an element of
/// `grad s(y_plus) - dh(y_plus)`.
pub fn certificate(
    l_y: f64,
    y_plus: &[f64],
    w: &[f64],
    grad_plus: &[f64],
    grad_w: &[f64],
) -> Vec<f64> {
    y_plus
        .iter()
        .zip(w)
        .zip(grad_plus.iter().zip(grad_w))
        .map(|((yp, wv), (gp, gw))| l_y * (yp - wv) + gp - gw)
        .collect()
}

/// `ceil(sqrt(kappa_y) ln(16 l_y gap / delta^2))`, floored at zero.
pub fn theoretical_budget_s_t(
    l_y: f64,
    kappa_y: f64,
    gap: f64,
    delta: f64,
) -> Result<u64, SubsolverError> {
    if !(delta > 0.0) {
        return Err(SubsolverError::BadTolerance(delta));
    }
    if !(gap > 0.0 && l_y > 0.0 && kappa_y > 0.0) {
        return Err(SubsolverError::InvalidArgument(format!(
            "need positive l_y, kappa_y and gap (got {l_y}, {kappa_y}, {gap})"
        )));
    }
    let s = (kappa_y.sqrt() * (16.0 * l_y * gap / (delta * delta)).ln()).ceil();
    Ok(if s > 0.0 { s as u64 } else { 0 })
}

/// Non-adaptive accelerated proximal gradient ascent on `s - h`.
///
/// Step `1 / l_y`, constant momentum `(1 - sqrt(mu / l_y)) / (1 + sqrt(mu / l_y))`.
/// After every prox step the certificate is evaluated and the first iterate
/// whose certificate norm is at most `delta` is returned. If `max_iters`
/// steps pass without acceptance, the iterate with the smallest certificate
/// is returned with `converged = false`.
pub fn apg_maximize(
    sub: &DualSubproblem<'_>,
    y0: &[f64],
    delta: f64,
    max_iters: usize,
) -> Result<SubsolveResult, SubsolverError> {
    if !(delta > 0.0) {
        return Err(SubsolverError::BadTolerance(delta));
    }
    if !(sub.mu > 0.0 && sub.l_y >= sub.mu) {
        return Err(SubsolverError::InvalidArgument(format!(
            "need 0 < mu <= l_y, got mu={}, l_y={}",
            sub.mu, sub.l_y
        )));
    }
    if y0.is_empty() {
        return Err(SubsolverError::EmptyInput);
    }
    let step = 1.0 / sub.l_y;
    let q = (sub.mu / sub.l_y).sqrt();
    let momentum = (1.0 - q) / (1.0 + q);

    let mut prev = y0.to_vec();
    let mut cur = y0.to_vec();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut budget = None;
    for k in 1..=max_iters.max(1) {
        let w: Vec<f64> = if k == 1 {
            cur.clone()
        } else {
            cur.iter()
                .zip(&prev)
                .map(|(c, p)| c + momentum * (c - p))
                .collect()
        };
        let gw = sub.grad(&w);
        if gw.iter().any(|v| !v.is_finite()) {
            return Err(SubsolverError::NonFiniteGradient(k));
        }
        let ascent: Vec<f64> = w.iter().zip(&gw).map(|(a, g)| a + step * g).collect();
        let y_plus = sub.h.prox(&ascent, step);
        let gp = sub.grad(&y_plus);
        if gp.iter().any(|v| !v.is_finite()) {
            return Err(SubsolverError::NonFiniteGradient(k));
        }
        let r = norm2(&certificate(sub.l_y, &y_plus, &w, &gp, &gw));
        if k == 1 {
            budget = first_step_budget(sub, y0, &y_plus, r, delta);
        }
        if r <= delta {
            return Ok(SubsolveResult {
                y: y_plus,
                certified_residual: r,
                iterations_used: k,
                converged: true,
                budget_s_t: budget,
            });
        }
        if best.as_ref().map_or(true, |(b, _)| r < *b) {
            best = Some((r, y_plus.clone()));
        }
        prev = std::mem::replace(&mut cur, y_plus);
    }
    let (r, y) = best.expect("at least one iteration");
    Ok(SubsolveResult {
        y,
        certified_residual: r,
        iterations_used: max_iters.max(1),
        converged: false,
        budget_s_t: budget,
    })
}

/// Upper bound on the initial gap `d* - d(y0)` from the first step:
/// `d(y1) - d(y0) + ||xi_1||^2 / (2 mu)`.
fn first_step_budget(
    sub: &DualSubproblem<'_>,
    y0: &[f64],
    y1: &[f64],
    r1: f64,
    delta: f64,
) -> Option<u64> {
    let gap = sub.objective(y1)? - sub.objective(y0)? + r1 * r1 / (2.0 * sub.mu);
    if !gap.is_finite() || gap <= 0.0 {
        return None;
    }
    theoretical_budget_s_t(sub.l_y, sub.l_y / sub.mu, gap, delta).ok()
}
