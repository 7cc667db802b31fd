use std::fmt;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use super::spectral::{largest_eigenvalue_psd, largest_singular_value, spectral_radius_deviation};
use super::{Graph, GraphError};

/// Scale `s` in `W = I - s L / lambda_max(L)`.
pub const DEFAULT_LAPLACIAN_SCALE: f64 = 0.8;

const EXACT_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;

/// Gossip weights together with their cached spectral quantities.
#[derive(Debug, Clone)]
pub struct MixingMatrix {
    weights: DMatrix<f64>,
    rho: f64,
    op_norm_w_minus_i: f64,
}

impl MixingMatrix {
    /// Wrap an arbitrary square weight matrix, computing `rho` and
    /// `||W - I||_2`. No consensus condition is enforced here; use
    /// [`validate_mixing`] for that.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self, GraphError> {
        if weights.nrows() != weights.ncols() || weights.nrows() == 0 {
            return Err(GraphError::DimensionMismatch {
                matrix: weights.nrows(),
                nodes: weights.ncols(),
            });
        }
        let m = weights.nrows();
        let rho = spectral_radius_deviation(&weights);
        let w_minus_i = &weights - DMatrix::<f64>::identity(m, m);
        let op_norm_w_minus_i = largest_singular_value(&w_minus_i, 1e-10);
        Ok(Self {
            weights,
            rho,
            op_norm_w_minus_i,
        })
    }

    /// The trivial 1x1 matrix `[1]` of a single agent.
    pub fn single_agent() -> Self {
        Self {
            weights: DMatrix::from_element(1, 1, 1.0),
            rho: 0.0,
            op_norm_w_minus_i: 0.0,
        }
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn size(&self) -> usize {
        self.weights.nrows()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn op_norm_w_minus_i(&self) -> f64 {
        self.op_norm_w_minus_i
    }

    pub fn is_symmetric(&self) -> bool {
        self.weights == self.weights.transpose()
    }
}

/// `W = I - scale * L / lambda_max(L)` for a connected graph.
///
/// `lambda_max` comes from power iteration (tolerance 1e-12, at most 10 000
/// sweeps). `W` is assembled entrywise from the symmetric Laplacian, so it is
/// exactly symmetric.
pub fn laplacian_mixing(graph: &Graph, scale: f64) -> Result<MixingMatrix, GraphError> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(GraphError::BadScale(scale));
    }
    let m = graph.node_count();
    if m == 1 {
        return Ok(MixingMatrix::single_agent());
    }
    if !graph.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let lap = graph.laplacian();
    let lambda_max = largest_eigenvalue_psd(&lap, 1e-12, 10_000);
    let factor = scale / lambda_max;
    let mut w = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let id = if i == j { 1.0 } else { 0.0 };
            w[(i, j)] = id - factor * lap[(i, j)];
        }
    }
    // lap is symmetric, but i<j and j>i entries went through identical
    // arithmetic; enforce bitwise symmetry anyway.
    for i in 0..m {
        for j in i + 1..m {
            w[(j, i)] = w[(i, j)];
        }
    }
    MixingMatrix::from_weights(w)
}

/// Outcome of one consensus condition.
#[derive(Debug, Clone)]
pub struct ConditionCheck {
    /// Roman numeral of the condition: `i`, `ii`, `iii` or `iv`.
    pub id: &'static str,
    pub description: &'static str,
    pub passed: bool,
    pub residual: f64,
    /// Entries that violate the sparsity pattern (condition i only).
    pub offending: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, id: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.id == id)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "({:>3}) {:<4} residual={:.3e}  {}",
                c.id,
                if c.passed { "PASS" } else { "FAIL" },
                c.residual,
                c.description
            )?;
            if !c.offending.is_empty() {
                writeln!(f, "      offending entries: {:?}", c.offending)?;
            }
        }
        Ok(())
    }
}

/// Check the four consensus conditions of a mixing matrix on `graph`:
///
/// * (i) `w_ij = 0` for `i != j` not joined by an edge;
/// * (ii) `rho = ||W - 11^T/m||_2 < 1`;
/// * (iii) `W 1 = 1`, `W^T 1 = 1` (within 1e-12) and `Null(W - I) = span(1)`,
///   the latter via the second-smallest singular value of
///   `(W - I)(I - 11^T/m)` exceeding 1e-10;
/// * (iv) `||W - I||_2 <= 2` (within 1e-12).
///
/// Failures are reported in the returned value, never raised.
pub fn validate_mixing(w: &MixingMatrix, graph: &Graph) -> Result<ValidationReport, GraphError> {
    let m = w.size();
    if m != graph.node_count() {
        return Err(GraphError::DimensionMismatch {
            matrix: m,
            nodes: graph.node_count(),
        });
    }
    let weights = w.weights();

    let mut offending = Vec::new();
    let mut off_max = 0.0_f64;
    for i in 0..m {
        for j in 0..m {
            if i != j && !graph.has_edge(i, j) && weights[(i, j)] != 0.0 {
                offending.push((i, j));
                off_max = off_max.max(weights[(i, j)].abs());
            }
        }
    }
    let sparsity = ConditionCheck {
        id: "i",
        description: "w_ij = 0 whenever j is not a neighbor of i",
        passed: offending.is_empty(),
        residual: off_max,
        offending,
    };

    let avg = DMatrix::from_element(m, m, 1.0 / m as f64);
    let dense_rho = (weights - &avg).singular_values().max();
    let contraction = ConditionCheck {
        id: "ii",
        description: "rho = ||W - 11^T/m||_2 < 1",
        passed: dense_rho < 1.0 - EXACT_TOL,
        residual: dense_rho,
        offending: vec![],
    };

    let row_res = (0..m)
        .map(|i| (weights.row(i).sum() - 1.0).abs())
        .fold(0.0, f64::max);
    let col_res = (0..m)
        .map(|j| (weights.column(j).sum() - 1.0).abs())
        .fold(0.0, f64::max);
    let eye = DMatrix::<f64>::identity(m, m);
    let w_minus_i = weights - &eye;
    let projected = &w_minus_i * (&eye - &avg);
    let mut sv: Vec<f64> = projected.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // For m = 1 the complement of span(1) is trivial.
    let second_smallest = sv.get(1).copied().unwrap_or(f64::INFINITY);
    let null_ok = m == 1 || second_smallest > RANK_TOL;
    let stochastic = ConditionCheck {
        id: "iii",
        description: "Null(W - I) = span(1) and W^T 1 = 1 (W 1 = 1 also checked)",
        passed: row_res <= EXACT_TOL && col_res <= EXACT_TOL && null_ok,
        residual: row_res.max(col_res),
        offending: vec![],
    };

    let op = w_minus_i.singular_values().max();
    let bounded = ConditionCheck {
        id: "iv",
        description: "||W - I||_2 <= 2",
        passed: op <= 2.0 + EXACT_TOL,
        residual: op,
        offending: vec![],
    };

    Ok(ValidationReport {
        checks: vec![sparsity, contraction, stochastic, bounded],
    })
}

/// Dense CSV: a `# m=<m> rho=<rho>` comment line followed by `m` rows of
/// comma-separated weights.
pub fn write_mixing_csv<W: Write>(w: &MixingMatrix, mut out: W) -> Result<(), GraphError> {
    let m = w.size();
    writeln!(out, "# m={} rho={}", m, w.rho())?;
    for i in 0..m {
        let row: Vec<String> = (0..m).map(|j| w.weights()[(i, j)].to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_mixing_csv<R: BufRead>(input: R) -> Result<MixingMatrix, GraphError> {
    let mut declared = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            for tok in rest.split_whitespace() {
                if let Some(v) = tok.strip_prefix("m=") {
                    declared = Some(v.parse::<usize>().map_err(|e| GraphError::Parse {
                        line: lineno,
                        msg: e.to_string(),
                    })?);
                }
            }
            continue;
        }
        let row = t
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| GraphError::Parse {
                line: lineno,
                msg: e.to_string(),
            })?;
        rows.push(row);
    }
    let m = rows.len();
    if m == 0 {
        return Err(GraphError::Parse {
            line: 1,
            msg: "no matrix rows".into(),
        });
    }
    if let Some(d) = declared {
        if d != m {
            return Err(GraphError::Parse {
                line: 1,
                msg: format!("header declares m={d} but found {m} rows"),
            });
        }
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != m) {
        return Err(GraphError::Parse {
            line: bad + 1,
            msg: format!("row has {} entries, expected {m}", rows[bad].len()),
        });
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    MixingMatrix::from_weights(DMatrix::from_row_slice(m, m, &flat))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_node_complete_graph() {
        let w = laplacian_mixing(&Graph::complete(2).unwrap(), 0.8).unwrap();
        let expect = [0.6, 0.4, 0.4, 0.6];
        for (k, e) in expect.iter().enumerate() {
            assert!((w.weights()[(k / 2, k % 2)] - e).abs() < 1e-12);
        }
        assert!((w.rho() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_closed_form() {
        for m in 2..10 {
            let w = laplacian_mixing(&Graph::complete(m).unwrap(), 0.8).unwrap();
            for i in 0..m {
                for j in 0..m {
                    let e = if i == j { 0.2 } else { 0.0 } + 0.8 / m as f64;
                    assert!((w.weights()[(i, j)] - e).abs() < 1e-12);
                }
            }
            assert!((w.rho() - 0.2).abs() < 1e-10, "m={m}, rho={}", w.rho());
        }
    }

    #[test]
    fn single_node_is_identity() {
        let w = laplacian_mixing(&Graph::new(1, []).unwrap(), 0.8).unwrap();
        assert_eq!(w.weights()[(0, 0)], 1.0);
        assert_eq!(w.rho(), 0.0);
        let rep = validate_mixing(&w, &Graph::new(1, []).unwrap()).unwrap();
        assert!(rep.all_passed(), "{rep}");
    }

    #[test]
    fn rejects_disconnected_and_bad_scale() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(laplacian_mixing(&g, 0.8), Err(GraphError::Disconnected)));
        let ring = Graph::ring(4).unwrap();
        assert!(laplacian_mixing(&ring, 0.0).is_err());
        assert!(laplacian_mixing(&ring, 1.5).is_err());
    }

    #[test]
    fn laplacian_mixing_passes_validation() {
        for m in [2, 3, 5, 8] {
            let g = Graph::ring(m).unwrap();
            let w = laplacian_mixing(&g, 0.8).unwrap();
            assert!(w.is_symmetric());
            let rep = validate_mixing(&w, &g).unwrap();
            assert!(rep.all_passed(), "{rep}");
        }
    }

    #[test]
    fn non_edge_weight_is_reported() {
        let g = Graph::path(3).unwrap();
        let mut w = laplacian_mixing(&g, 0.8).unwrap().weights().clone();
        w[(0, 2)] = 0.1;
        w[(0, 0)] -= 0.1;
        let rep = validate_mixing(&MixingMatrix::from_weights(w).unwrap(), &g).unwrap();
        let c = rep.check("i").unwrap();
        assert!(!c.passed);
        assert_eq!(c.offending, vec![(0, 2)]);
    }

    #[test]
    fn identity_on_path_fails_contraction_and_null_space() {
        let g = Graph::path(3).unwrap();
        let w = MixingMatrix::from_weights(DMatrix::identity(3, 3)).unwrap();
        let rep = validate_mixing(&w, &g).unwrap();
        assert!(rep.check("i").unwrap().passed);
        assert!(!rep.check("ii").unwrap().passed);
        assert!(!rep.check("iii").unwrap().passed);
        assert!(rep.check("iv").unwrap().passed);
    }

    #[test]
    fn csv_round_trip() {
        let g = Graph::ring(5).unwrap();
        let w = laplacian_mixing(&g, 0.8).unwrap();
        let mut buf = Vec::new();
        write_mixing_csv(&w, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("# m=5 rho="));
        let back = read_mixing_csv(&buf[..]).unwrap();
        assert_eq!(back.weights(), w.weights());
    }
}
