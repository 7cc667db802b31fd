//! Accelerated proximal gradient on an ill-conditioned strongly concave
//! quadratic, compared with the closed-form maximizer.

use dgdmax::problem::{DualTerm, MinimaxProblem, PrimalRegularizer, QuadraticAgent, QuadraticMinimax};
use dgdmax::subsolver::{apg_maximize, DualSubproblem};
use nalgebra::{DMatrix, DVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = 8;
    let spectrum = DVector::from_fn(d, |j, _| 0.05 * 2f64.powi(j as i32));
    let agent = QuadraticAgent {
        p: DMatrix::identity(2, 2),
        b: DMatrix::from_fn(2, d, |i, j| ((i + 2 * j) as f64).sin()),
        c: DVector::from_fn(d, |j, _| 0.3 * j as f64),
        q: DMatrix::from_diagonal(&spectrum),
    };
    let prob = QuadraticMinimax::new(vec![agent], PrimalRegularizer::Zero, DualTerm::Zero)?;
    let c = prob.constants();
    println!("mu {:.3}, L_y {:.3}, condition number {:.0}", c.mu, c.l_y, c.kappa_y());

    let x = [0.4, -1.0];
    let lt = vec![0.0; d];
    let exact = prob.exact_dual(0, &x, &lt, 1.0).expect("invertible curvature");
    let sub = DualSubproblem::for_agent(&prob, 0, &x, &lt, 1.0);
    let y0 = vec![0.0; d];
    for delta in [1e-2, 1e-5, 1e-8] {
        let r = apg_maximize(&sub, &y0, delta, 100_000)?;
        let err: f64 = r.y.iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        println!(
            "delta {delta:.0e}: {:>4} iterations (budget {:?}), certificate {:.2e}, error {:.2e} <= delta/mu = {:.2e}",
            r.iterations_used,
            r.budget_s_t,
            r.certified_residual,
            err,
            delta / c.mu
        );
    }
    Ok(())
}
