//! Scalar toy instance showing that the Minty variational inequality can fail.
//!
//! The instance is `f(x, y) = -x^2 y + y^2 / 2` with `x` in `[-1, 1]`. As
//! written, `f(x, .)` has curvature `+1`, so it is convex rather than concave
//! in `y` and `y = x^2` is a minimizer of `f(x, .)`. The operator and scan
//! below use the expression exactly as stated and do not guess at a sign fix.

/// The scalar toy instance.
#[derive(Debug, Clone, Copy, Default)]
pub struct ToyMinty;

impl ToyMinty {
    pub fn value(&self, x: f64, y: f64) -> f64 {
        -x * x * y + 0.5 * y * y
    }

    pub fn grad_x(&self, x: f64, y: f64) -> f64 {
        -2.0 * x * y
    }

    pub fn grad_y(&self, x: f64, y: f64) -> f64 {
        -x * x + y
    }

    /// Stationary point of `f(x, .)`.
    pub fn critical_y(&self, x: f64) -> f64 {
        x * x
    }
}

/// `(f_x, -f_y)` of the toy instance: `(-2 x y, x^2 - y)`.
pub fn minty_operator(x: f64, y: f64) -> (f64, f64) {
    let t = ToyMinty;
    (t.grad_x(x, y), -t.grad_y(x, y))
}

/// Result of scanning candidate Minty points.
#[derive(Debug, Clone, PartialEq)]
pub struct MintyScan {
    /// Number of candidate points `(xb, yb)` examined.
    pub candidates: usize,
    /// Candidates for which no test point produced a negative inner product.
    pub survivors: Vec<(f64, f64)>,
    /// Largest over candidates of the smallest inner product over test points.
    pub worst_case: f64,
}

impl MintyScan {
    /// Every candidate is refuted by at least one test point.
    pub fn condition_fails(&self) -> bool {
        self.survivors.is_empty()
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    })
}

/// For each candidate on an `nx x ny` grid over `x_range x y_range`, look for
/// a test point `(x, y)` with `<F(x, y), (x, y) - (xb, yb)> < 0`.
pub fn minty_scan(
    x_range: (f64, f64),
    y_range: (f64, f64),
    nx: usize,
    ny: usize,
    tests: &[(f64, f64)],
) -> MintyScan {
    let mut survivors = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    let mut candidates = 0;
    for xb in linspace(x_range.0, x_range.1, nx) {
        for yb in linspace(y_range.0, y_range.1, ny) {
            candidates += 1;
            let best = tests
                .iter()
                .map(|&(x, y)| {
                    let (fx, fy) = minty_operator(x, y);
                    fx * (x - xb) + fy * (y - yb)
                })
                .fold(f64::INFINITY, f64::min);
            if best >= 0.0 {
                survivors.push((xb, yb));
            }
            worst = worst.max(best);
        }
    }
    MintyScan {
        candidates,
        survivors,
        worst_case: worst,
    }
}
