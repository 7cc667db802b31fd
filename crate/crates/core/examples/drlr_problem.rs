//! Distributionally robust logistic regression split over five agents.

use dgdmax::harness::gen_synthetic;
use dgdmax::metrics::grad_p;
use dgdmax::problem::{DrlrInstance, DrlrParams, MinimaxProblem, Partition};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = gen_synthetic(20, 200, 0.1, 1)?;
    let part = Partition::random(data.sample_count(), 5, 2)?;
    let prob = DrlrInstance::new(data, part, DrlrParams::default())?;

    let c = prob.constants();
    let lip = prob.lipschitz();
    println!("L = {:.4} (bound {:.4}, sampled {:.4})", c.l, lip.analytic, lip.sampled);
    println!("mu = L_y = {}, kappa = {:.2}", c.mu, c.kappa());

    let x = vec![0.1; prob.primal_dim()];
    let y = prob.pooled_exact_dual(&x).expect("closed form");
    let top = y.iter().cloned().fold(f64::MIN, f64::max);
    println!("worst-case weights at x: max {:.4}, uniform {:.4}", top, 1.0 / y.len() as f64);

    let g = grad_p(&prob, &x).expect("closed form");
    println!("||grad p(x)|| = {:.4e}", g.iter().map(|v| v * v).sum::<f64>().sqrt());

    for i in 0..prob.agents() {
        println!("agent {i}: f_i(x, y*) = {:.4}", prob.value(i, &x, &y));
    }
    Ok(())
}
