use crate::problem::{Dataset, ProblemError};
use crate::rng::SeedStream;

/// Synthetic binary classification data.
///
/// A hidden direction `w ~ N(0, I)` is drawn first, then for each sample
/// features `a_j ~ N(0, I / n)` and label `sign(<a_j, w>)` (ties to `+1`),
/// flipped with probability `flip_noise`.
pub fn gen_synthetic(
    features: usize,
    samples: usize,
    flip_noise: f64,
    seed: u64,
) -> Result<Dataset, ProblemError> {
    if samples < 2 || features < 1 {
        return Err(ProblemError::InvalidParameter(format!(
            "need at least 2 samples and 1 feature, got N={samples}, n={features}"
        )));
    }
    if !(0.0..=1.0).contains(&flip_noise) {
        return Err(ProblemError::InvalidParameter(format!(
            "flip noise must lie in [0, 1], got {flip_noise}"
        )));
    }
    let mut rng = SeedStream::new(seed);
    let w: Vec<f64> = (0..features).map(|_| rng.gaussian()).collect();
    let scale = 1.0 / (features as f64).sqrt();
    let mut rows = Vec::with_capacity(samples);
    let mut labels = Vec::with_capacity(samples);
    for _ in 0..samples {
        let a: Vec<f64> = (0..features).map(|_| scale * rng.gaussian()).collect();
        let mut b = if crate::linalg::dot(&a, &w) >= 0.0 { 1.0 } else { -1.0 };
        if rng.next_f64() < flip_noise {
            b = -b;
        }
        rows.push(a);
        labels.push(b);
    }
    Dataset::from_dense(&rows, &labels)
}
