//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use dgdmax::problem::Dataset;
use nalgebra::DMatrix;

/// Simplex projection by enumerating every support set and keeping the one
/// that satisfies the KKT conditions.
pub fn brute_force_simplex(z: &[f64]) -> Vec<f64> {
    let n = z.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|&j| mask & (1 << j) != 0).collect();
        let tau = (support.iter().map(|&j| z[j]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut y = vec![0.0; n];
        let mut ok = true;
        for j in 0..n {
            if mask & (1 << j) != 0 {
                y[j] = z[j] - tau;
                ok &= y[j] >= -1e-14;
            } else {
                ok &= z[j] - tau <= 1e-14;
            }
        }
        if ok {
            let d: f64 = y.iter().zip(z).map(|(a, b)| (a - b).powi(2)).sum();
            if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                best = Some((d, y));
            }
        }
    }
    best.expect("some support satisfies KKT").1
}

/// Central-difference gradient with a relative step.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let h = 1e-6 * (1.0 + x[k].abs());
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[k] += h;
            b[k] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Relative error `||a - b|| / (1 + ||a||)`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    diff_norm(a, b) / (1.0 + norm(a))
}

/// `||W - 11^T/m||_2` from a full SVD.
pub fn svd_rho(w: &DMatrix<f64>) -> f64 {
    let m = w.nrows();
    (w - DMatrix::from_element(m, m, 1.0 / m as f64)).singular_values().max()
}

/// Classic perceptron with a bias; `Some(epochs)` once a full pass makes no
/// mistakes.
pub fn perceptron(data: &Dataset, max_epochs: usize) -> Option<usize> {
    let n = data.feature_dim();
    let mut w = vec![0.0; n + 1];
    for epoch in 1..=max_epochs {
        let mut mistakes = 0;
        for j in 0..data.sample_count() {
            let b = data.label(j);
            let (idx, val) = data.row(j);
            let s: f64 = idx.iter().zip(val).map(|(&k, &v)| w[k] * v).sum::<f64>() + w[n];
            if b * s <= 0.0 {
                mistakes += 1;
                for (&k, &v) in idx.iter().zip(val) {
                    w[k] += b * v;
                }
                w[n] += b;
            }
        }
        if mistakes == 0 {
            return Some(epoch);
        }
    }
    None
}

/// Logistic loss `log(1 + exp(-t))` evaluated stably.
pub fn softplus_neg(t: f64) -> f64 {
    if t > 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

/// Pooled DRLR objective `sum_j y_j loss_j + V_x(x) - V_y(y)` written out
/// directly from the model definition.
pub fn drlr_objective(data: &Dataset, alpha: f64, beta_x: f64, beta_y: f64, x: &[f64], y: &[f64]) -> f64 {
    let n = data.sample_count() as f64;
    let mut loss = 0.0;
    for j in 0..data.sample_count() {
        let (idx, val) = data.row(j);
        let t: f64 = idx.iter().zip(val).map(|(&k, &v)| x[k] * v).sum();
        loss += y[j] * softplus_neg(data.label(j) * t);
    }
    let vx: f64 = x.iter().map(|&v| alpha * v * v / (1.0 + alpha * v * v)).sum::<f64>() * beta_x;
    let vy: f64 = y.iter().map(|&v| (v - 1.0 / n).powi(2)).sum::<f64>() * beta_y / 2.0;
    loss + vx - vy
}
