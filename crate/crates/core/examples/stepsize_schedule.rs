//! Worst-case stepsizes, dual tolerances and the iteration budget.

use dgdmax::optim::{default_delta, default_stepsizes, iteration_budget_t};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (l, kappa) = (15.0, 150.0);
    for rho in [0.0, 0.5, 0.7, 0.9] {
        let (ex, el) = default_stepsizes(l, kappa, rho)?;
        let t = iteration_budget_t(1e-2, l, kappa, rho, 1.0)?;
        println!("rho {rho}: eta_x {ex:.3e}, eta_lambda {el:.3e}, rounds for 1e-2: {t}");
    }
    for t in [0, 1, 10, 100, 1000] {
        println!("delta_{t} = {:.3e}", default_delta(t, 0.7, kappa));
    }
    Ok(())
}
