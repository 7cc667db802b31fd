use super::SubsolverError;

/// Euclidean projection onto the probability simplex.
///
/// Sort-and-threshold: with `u` the entries sorted descending, take the
/// largest `k` such that `u_k - (u_1 + ... + u_k - 1) / k > 0`, set `tau` to
/// that average and return `max(z - tau, 0)`.
pub fn project_simplex(z: &[f64]) -> Result<Vec<f64>, SubsolverError> {
    if z.is_empty() {
        return Err(SubsolverError::EmptyInput);
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(SubsolverError::NonFinite);
    }
    let mut u = z.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &v) in u.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if v - t > 0.0 {
            tau = t;
        } else {
            break;
        }
    }
    Ok(z.iter().map(|&v| (v - tau).max(0.0)).collect())
}
