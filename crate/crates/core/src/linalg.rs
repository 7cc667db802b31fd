//! Small dense helpers: slice arithmetic and the row-per-agent matrix used
//! for the network iterates.

use nalgebra::DMatrix;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Euclidean distance `||a - b||`.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Row-major `rows x cols` matrix whose row `i` is agent `i`'s local vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl AgentMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Every row equal to `row`.
    pub fn broadcast(rows: usize, row: &[f64]) -> Self {
        let mut data = Vec::with_capacity(rows * row.len());
        for _ in 0..rows {
            data.extend_from_slice(row);
        }
        Self {
            rows,
            cols: row.len(),
            data,
        }
    }

    /// Build from per-agent rows. Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged agent rows");
            data.extend(r);
        }
        Self {
            rows: n,
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn frobenius(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Column sums, i.e. `1^T M`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in self.iter_rows() {
            for (o, v) in out.iter_mut().zip(r) {
                *o += v;
            }
        }
        out
    }

    /// Average row `(1/m) 1^T M`.
    pub fn mean_row(&self) -> Vec<f64> {
        let inv = 1.0 / self.rows as f64;
        self.column_sums().into_iter().map(|v| v * inv).collect()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: sub(&self.data, &other.data),
        }
    }

    /// `self + alpha * other`
    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        axpy(alpha, &other.data, &mut out.data);
        out
    }

    /// Neighbor averaging `W M`: row `i` is `sum_j w_ij m_j`, summed in
    /// increasing `j` so the result does not depend on scheduling.
    pub fn mix(&self, weights: &DMatrix<f64>) -> Self {
        self.mix_with(weights, false)
    }

    /// Column-weight averaging `W^T M`: row `i` is `sum_j w_ji m_j`.
    pub fn mix_transpose(&self, weights: &DMatrix<f64>) -> Self {
        self.mix_with(weights, true)
    }

    fn mix_with(&self, weights: &DMatrix<f64>, transpose: bool) -> Self {
        assert_eq!(weights.nrows(), self.rows);
        assert_eq!(weights.ncols(), self.rows);
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * self.cols..(i + 1) * self.cols];
            for j in 0..self.rows {
                let w = if transpose {
                    weights[(j, i)]
                } else {
                    weights[(i, j)]
                };
                if w != 0.0 {
                    axpy(w, &self.data[j * self.cols..(j + 1) * self.cols], dst);
                }
            }
        }
        out
    }
}
