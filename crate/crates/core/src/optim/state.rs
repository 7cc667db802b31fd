use crate::linalg::AgentMatrix;

/// Iterates of all agents after round `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub t: usize,
    /// Row `i` is agent `i`'s primal copy.
    pub x: AgentMatrix,
    pub y: AgentMatrix,
    /// Consensus multipliers.
    pub lambda: AgentMatrix,
    /// `W^T lambda - lambda`
    pub lambda_tilde: AgentMatrix,
    /// Gradient trackers.
    pub v: AgentMatrix,
    /// `grad_x f_i(x_i, y_i)` of the current iterates.
    pub grads: AgentMatrix,
}

impl NetworkState {
    pub fn agents(&self) -> usize {
        self.x.rows()
    }

    pub fn x_avg(&self) -> Vec<f64> {
        self.x.mean_row()
    }

    /// `||X - 1 x_avg^T||_F`
    pub fn consensus_norm(&self) -> f64 {
        let avg = AgentMatrix::broadcast(self.x.rows(), &self.x_avg());
        self.x.sub(&avg).frobenius()
    }

    /// `||1^T Lambda||_inf`
    pub fn multiplier_drift(&self) -> f64 {
        crate::linalg::max_abs(&self.lambda.column_sums())
    }

    /// Largest absolute entry over all iterates.
    pub fn max_abs(&self) -> f64 {
        [&self.x, &self.y, &self.lambda, &self.v]
            .iter()
            .map(|m| m.max_abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        [&self.x, &self.y, &self.lambda, &self.lambda_tilde, &self.v]
            .iter()
            .all(|m| m.is_finite())
    }
}
