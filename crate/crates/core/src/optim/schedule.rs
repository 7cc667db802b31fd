//! Closed-form stepsizes, the inexactness schedule and the iteration budget.

use super::OptimError;
use crate::problem::ProblemConstants;

fn check_rho(rho: f64) -> Result<(), OptimError> {
    if !(0.0..1.0).contains(&rho) {
        return Err(OptimError::InvalidSchedule(format!(
            "spectral deviation must lie in [0, 1), got {rho}"
        )));
    }
    Ok(())
}

/// Primal and multiplier stepsizes
/// `eta_x = (1 - rho)^2 / (5 L sqrt(1 + 6 kappa^2))` and
/// `eta_lambda = (1 - rho)^2 / (L (9 kappa + 2))`.
pub fn default_stepsizes(l: f64, kappa: f64, rho: f64) -> Result<(f64, f64), OptimError> {
    check_rho(rho)?;
    if !(l > 0.0 && kappa > 0.0) {
        return Err(OptimError::InvalidSchedule(format!(
            "need L > 0 and kappa > 0, got L={l}, kappa={kappa}"
        )));
    }
    let gap = (1.0 - rho) * (1.0 - rho);
    let eta_x = gap / (5.0 * l * (1.0 + 6.0 * kappa * kappa).sqrt());
    let eta_lambda = gap / (l * (9.0 * kappa + 2.0));
    Ok((eta_x, eta_lambda))
}

/// Dual tolerance `(1 - rho)^2 / (8 kappa (1 + t))` of round `t`.
pub fn default_delta(t: usize, rho: f64, kappa: f64) -> f64 {
    (1.0 - rho) * (1.0 - rho) / (8.0 * kappa * (1.0 + t as f64))
}

/// Rounds sufficient for an `epsilon`-stationary point:
/// `ceil(max{64 (10 L kappa (phi0 + 1) + 1) / (1 - rho)^2, 4096 L kappa / (1 - rho), 800} / epsilon^2)`.
pub fn iteration_budget_t(
    epsilon: f64,
    l: f64,
    kappa: f64,
    rho: f64,
    phi0: f64,
) -> Result<u64, OptimError> {
    if !(epsilon > 0.0) {
        return Err(OptimError::InvalidSchedule(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    check_rho(rho)?;
    let a = 64.0 * (10.0 * l * kappa * (phi0 + 1.0) + 1.0) / ((1.0 - rho) * (1.0 - rho));
    let b = 4096.0 * l * kappa / (1.0 - rho);
    let t = a.max(b).max(800.0) / (epsilon * epsilon);
    Ok(t.ceil() as u64)
}

/// Per-round dual tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaSchedule {
    /// `(1 - rho)^2 / (8 kappa (1 + t))`
    Decaying { rho: f64, kappa: f64 },
    Constant(f64),
}

impl DeltaSchedule {
    pub fn at(&self, t: usize) -> f64 {
        match *self {
            Self::Decaying { rho, kappa } => default_delta(t, rho, kappa),
            Self::Constant(d) => d,
        }
    }
}

/// Stepsizes and dual tolerance of the decentralized method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub eta_x: f64,
    pub eta_lambda: f64,
    pub delta: DeltaSchedule,
}

impl Schedule {
    /// Closed-form defaults for the given constants and mixing matrix.
    pub fn defaults(c: &ProblemConstants, rho: f64) -> Result<Self, OptimError> {
        let (eta_x, eta_lambda) = default_stepsizes(c.l, c.kappa(), rho)?;
        Ok(Self {
            eta_x,
            eta_lambda,
            delta: DeltaSchedule::Decaying {
                rho,
                kappa: c.kappa(),
            },
        })
    }

    /// Defaults with optional stepsize overrides.
    pub fn with_overrides(
        c: &ProblemConstants,
        rho: f64,
        eta_x: Option<f64>,
        eta_lambda: Option<f64>,
    ) -> Result<Self, OptimError> {
        let mut s = Self::defaults(c, rho)?;
        if let Some(v) = eta_x {
            s.eta_x = v;
        }
        if let Some(v) = eta_lambda {
            s.eta_lambda = v;
        }
        if !(s.eta_x > 0.0 && s.eta_lambda >= 0.0) {
            return Err(OptimError::InvalidSchedule(format!(
                "stepsizes must be positive, got eta_x={}, eta_lambda={}",
                s.eta_x, s.eta_lambda
            )));
        }
        Ok(s)
    }
}
