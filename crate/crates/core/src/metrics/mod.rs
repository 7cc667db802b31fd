//! Stationarity and consensus measures for the multiplier reformulation and
//! for the original pooled problem.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::graph::MixingMatrix;
use crate::linalg::{axpy, distance, AgentMatrix};
use crate::optim::NetworkState;
use crate::problem::MinimaxProblem;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("stepsize must be positive, got {0}")]
    BadStepsize(f64),
    #[error("exact multiplier gradient needs a closed-form dual maximizer")]
    MissingOracle,
}

/// Split `x` into its row average broadcast to every row and the deviation
/// from it.
pub fn deviation(x: &AgentMatrix) -> (AgentMatrix, AgentMatrix) {
    let avg = AgentMatrix::broadcast(x.rows(), &x.mean_row());
    let perp = x.sub(&avg);
    (avg, perp)
}

/// `(1/eta) ||x - prox_{eta g}(x - eta grad)||`
pub fn prox_grad_mapping<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    eta: f64,
    grad: &[f64],
) -> Result<f64, MetricsError> {
    if !(eta > 0.0) {
        return Err(MetricsError::BadStepsize(eta));
    }
    let z: Vec<f64> = x.iter().zip(grad).map(|(a, g)| a - eta * g).collect();
    Ok(distance(x, &problem.prox_g(&z, eta)) / eta)
}

/// `||(1/m) 1^T V - (1/m) sum_i grad_x f_i(x_i, y_i)||`
pub fn tracking_residual<P: MinimaxProblem + ?Sized>(
    problem: &P,
    v: &AgentMatrix,
    x: &AgentMatrix,
    y: &AgentMatrix,
) -> f64 {
    let m = x.rows();
    let mut mean = vec![0.0; x.cols()];
    for i in 0..m {
        axpy(1.0 / m as f64, &problem.grad_x(i, x.row(i), y.row(i)), &mut mean);
    }
    distance(&v.mean_row(), &mean)
}

/// Gradient of the pooled primal function, `(1/m) sum_i grad_x f_i(x, y*(x))`
/// with `y*(x)` the exact pooled maximizer. `None` without a closed form.
pub fn grad_p<P: MinimaxProblem + ?Sized>(problem: &P, x: &[f64]) -> Option<Vec<f64>> {
    let y = problem.pooled_exact_dual(x)?;
    Some(problem.mean_grad_x(x, &y))
}

/// Exact dual maximizers of all agents at the consensus point `1 x^T` with
/// multipliers `lambda`.
pub fn consensus_duals<P: MinimaxProblem + ?Sized>(
    problem: &P,
    w: &DMatrix<f64>,
    x: &[f64],
    lambda: &AgentMatrix,
) -> Option<AgentMatrix> {
    let lt = lambda.mix_transpose(w).sub(lambda);
    let l = problem.constants().l;
    let rows = (0..problem.agents())
        .map(|i| problem.exact_dual(i, x, lt.row(i), l))
        .collect::<Option<Vec<_>>>()?;
    Some(AgentMatrix::from_rows(rows))
}

/// `(L / (2 sqrt(m))) ||(W - I) Y||_F`
fn disagreement_norm(w: &DMatrix<f64>, y: &AgentMatrix, l: f64) -> f64 {
    let m = y.rows() as f64;
    l / (2.0 * m.sqrt()) * y.mix(w).sub(y).frobenius()
}

/// Norm of the multiplier gradient of the reformulated primal function at
/// `(x_avg, lambda)`. With `exact` the consensus maximizers are computed from
/// the closed form; otherwise `current_y` stands in for them and the returned
/// flag is `true`.
pub fn lambda_grad<P: MinimaxProblem + ?Sized>(
    problem: &P,
    w: &DMatrix<f64>,
    x_avg: &[f64],
    lambda: &AgentMatrix,
    current_y: &AgentMatrix,
    exact: bool,
) -> Result<(f64, bool), MetricsError> {
    let l = problem.constants().l;
    if exact {
        let y_hat = consensus_duals(problem, w, x_avg, lambda).ok_or(MetricsError::MissingOracle)?;
        Ok((disagreement_norm(w, &y_hat, l), false))
    } else {
        Ok((disagreement_norm(w, current_y, l), true))
    }
}

/// Full gradient of the reformulated primal function at `(x, lambda)`:
/// `((1/m) sum_i grad_x f_i(x, y_i), -(L / (2 sqrt(m))) (W - I) Y)` with `Y`
/// the exact consensus maximizers.
pub fn grad_big_p<P: MinimaxProblem + ?Sized>(
    problem: &P,
    w: &DMatrix<f64>,
    x: &[f64],
    lambda: &AgentMatrix,
) -> Option<(Vec<f64>, AgentMatrix)> {
    let y_hat = consensus_duals(problem, w, x, lambda)?;
    let gx = grad_x_big_p(problem, x, &y_hat);
    let m = problem.agents() as f64;
    let l = problem.constants().l;
    let diff = y_hat.mix(w).sub(&y_hat);
    let gl = AgentMatrix::zeros(diff.rows(), diff.cols()).add_scaled(-l / (2.0 * m.sqrt()), &diff);
    Some((gx, gl))
}

/// `(1/m) sum_i grad_x f_i(x, y_i)` for per-agent duals `y`.
pub fn grad_x_big_p<P: MinimaxProblem + ?Sized>(problem: &P, x: &[f64], y: &AgentMatrix) -> Vec<f64> {
    let m = problem.agents();
    let mut g = vec![0.0; x.len()];
    for i in 0..m {
        axpy(1.0 / m as f64, &problem.grad_x(i, x, y.row(i)), &mut g);
    }
    g
}

/// All per-round measures of a network state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityReport {
    /// Gradient mapping of the reformulated primal function at `x_avg`.
    pub prox_grad_norm_big_p: f64,
    /// Gradient mapping of the original primal function at `x_avg`, when the
    /// pooled maximizer has a closed form.
    pub prox_grad_norm_p: Option<f64>,
    /// `||X_perp||_F / sqrt(m)`
    pub consensus_x_raw: f64,
    /// `(L / sqrt(m)) ||X_perp||_F`
    pub consensus_x: f64,
    pub lambda_grad_norm: f64,
    /// Set when the current duals replaced the exact consensus maximizers.
    pub lambda_grad_is_surrogate: bool,
    pub tracking_residual: f64,
}

/// Measure `state` with gradient-mapping stepsize `eta`. Exact consensus
/// maximizers are used whenever the problem provides them.
pub fn stationarity<P: MinimaxProblem + ?Sized>(
    problem: &P,
    mixing: &MixingMatrix,
    state: &NetworkState,
    eta: f64,
) -> Result<StationarityReport, MetricsError> {
    let w = mixing.weights();
    let m = state.agents() as f64;
    let l = problem.constants().l;
    let x_avg = state.x_avg();
    let (_, perp) = deviation(&state.x);
    let perp_norm = perp.frobenius();

    let (y_hat, surrogate) = match consensus_duals(problem, w, &x_avg, &state.lambda) {
        Some(y) => (y, false),
        None => (state.y.clone(), true),
    };
    let gx = grad_x_big_p(problem, &x_avg, &y_hat);
    let prox_big = prox_grad_mapping(problem, &x_avg, eta, &gx)?;
    let prox_small = match grad_p(problem, &x_avg) {
        Some(g) => Some(prox_grad_mapping(problem, &x_avg, eta, &g)?),
        None => None,
    };
    Ok(StationarityReport {
        prox_grad_norm_big_p: prox_big,
        prox_grad_norm_p: prox_small,
        consensus_x_raw: perp_norm / m.sqrt(),
        consensus_x: l / m.sqrt() * perp_norm,
        lambda_grad_norm: disagreement_norm(w, &y_hat, l),
        lambda_grad_is_surrogate: surrogate,
        tracking_residual: tracking_residual(problem, &state.v, &state.x, &state.y),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviation_of_consensus_is_zero() {
        let x = AgentMatrix::broadcast(4, &[1.0, -2.0]);
        let (avg, perp) = deviation(&x);
        assert_eq!(avg, x);
        assert_eq!(perp.max_abs(), 0.0);
    }

    #[test]
    fn deviation_of_opposite_rows() {
        let x = AgentMatrix::from_rows(vec![vec![1.0, 3.0], vec![-1.0, -3.0]]);
        let (avg, perp) = deviation(&x);
        assert_eq!(avg.max_abs(), 0.0);
        assert_eq!(perp, x);
    }
}
