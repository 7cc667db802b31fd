use nalgebra::{DMatrix, DVector};

use crate::rng::SeedStream;

const START_SEED: u64 = 0x5eed_0f_5eed;

fn start_vector(n: usize) -> DVector<f64> {
    let mut rng = SeedStream::new(START_SEED);
    let v = DVector::from_fn(n, |_, _| rng.uniform(-1.0, 1.0));
    let norm = v.norm();
    v / norm
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration. Stops when the Rayleigh quotient changes by at most
/// `tol * theta` between sweeps, or after `max_iter` sweeps.
pub fn largest_eigenvalue_psd(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = start_vector(n);
    let mut theta = 0.0;
    for _ in 0..max_iter {
        let w = a * &v;
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        let done = (next - theta).abs() <= tol * next.abs();
        theta = next;
        if done {
            break;
        }
    }
    theta
}

/// Largest singular value of `m` via power iteration on `m^T m`.
///
/// Iterates until the eigen-residual `||G v - theta v||` of the Gram matrix
/// falls below `rel_tol * theta`.
pub fn largest_singular_value(m: &DMatrix<f64>, rel_tol: f64) -> f64 {
    let gram = m.transpose() * m;
    let n = gram.nrows();
    if n == 0 {
        return 0.0;
    }
    let scale = gram.amax();
    if scale == 0.0 {
        return 0.0;
    }
    let mut v = start_vector(n);
    let mut theta = 0.0;
    for _ in 0..200_000 {
        let w = &gram * &v;
        theta = v.dot(&w);
        let residual = (&w - &v * theta).norm();
        let norm = w.norm();
        if norm <= f64::EPSILON * scale {
            return 0.0;
        }
        if residual <= rel_tol * theta {
            break;
        }
        v = w / norm;
    }
    theta.max(0.0).sqrt()
}

/// `rho = ||W - (1/m) 1 1^T||_2`, the per-round contraction factor of the
/// consensus error.
pub fn spectral_radius_deviation(w: &DMatrix<f64>) -> f64 {
    let m = w.nrows();
    let avg = DMatrix::from_element(m, m, 1.0 / m as f64);
    largest_singular_value(&(w - avg), 1e-10)
}
