//! Decentralized run on a quadratic minimax problem where every measure
//! decays linearly.

use dgdmax::graph::{laplacian_mixing, Graph};
use dgdmax::metrics::stationarity;
use dgdmax::optim::{DGdMax, DeltaSchedule, DualSolver, Schedule};
use dgdmax::problem::{DualTerm, MinimaxProblem, PrimalRegularizer, QuadraticMinimax};
use nalgebra::DMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = 5;
    let seed = QuadraticMinimax::random(m, 4, 3, 1.0, 2.0, 0.5, 7, DualTerm::Zero)?;
    let agents = (0..m)
        .map(|i| {
            let mut a = seed.agent(i).clone();
            a.p = DMatrix::identity(4, 4) * (1.0 + 0.2 * i as f64);
            a
        })
        .collect();
    let prob = QuadraticMinimax::new(agents, PrimalRegularizer::Zero, DualTerm::Zero)?;
    let w = laplacian_mixing(&Graph::ring(m)?, 0.8)?;
    let schedule = Schedule {
        eta_x: 0.05,
        eta_lambda: 0.1,
        delta: DeltaSchedule::Constant(0.0),
    };
    let method = DGdMax::new(&prob, &w, schedule)?.with_solver(DualSolver::Exact);
    let (mut state, _) = method.init(&[1.0; 4])?;
    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "round", "P-grad", "p-grad", "consensus", "lambda");
    for t in 0..=2000 {
        if t % 250 == 0 {
            let r = stationarity(&prob, &w, &state, schedule.eta_x)?;
            println!(
                "{t:>5} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e}",
                r.prox_grad_norm_big_p,
                r.prox_grad_norm_p.unwrap_or(f64::NAN),
                r.consensus_x,
                r.lambda_grad_norm
            );
        }
        state = method.step(&state)?.0;
    }
    println!("constants: {:?}", prob.constants());
    Ok(())
}
