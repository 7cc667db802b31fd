//! D-GDMax on the small reference logistic regression setup, with the
//! worst-case default stepsizes and with a hand-picked pair.

use dgdmax::harness::{Experiment, RunConfig};

fn report(label: &str, cfg: &RunConfig) -> Result<(), Box<dyn std::error::Error>> {
    let exp = Experiment::build(cfg)?;
    println!("{label}: eta_x {:.3e}, eta_lambda {:.3e}", exp.schedule.eta_x, exp.schedule.eta_lambda);
    let out = exp.run_with(None::<std::io::Sink>, true)?;
    for r in out.rows.iter().step_by(cfg.t_max / 5).chain(out.last.iter()) {
        println!(
            "  t {:>5}  P-grad {:.3e}  p-grad {:.3e}  consensus {:.3e}  lambda {:.3e}  tracking {:.1e}",
            r.t,
            r.prox_grad_big_p,
            r.prox_grad_p.unwrap_or(f64::NAN),
            r.consensus_x_scaled,
            r.lambda_grad,
            r.tracking_residual
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = RunConfig::desk();
    cfg.t_max = 2000;
    report("defaults", &cfg)?;
    cfg.set("algorithm.eta_x", "0.01")?;
    cfg.set("algorithm.eta_lambda", "0.005")?;
    report("hand-picked", &cfg)?;
    Ok(())
}
