//! Single-machine GDMax against GDA, each with its best stepsizes from a
//! small grid, for a weakly and a strongly regularized dual.

use dgdmax::harness::{grid_search, parse_grid, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for beta in ["0.01", "1"] {
        for alg in ["gdmax", "gda"] {
            let mut cfg = RunConfig::default();
            cfg.set("problem.beta_y", beta)?;
            cfg.set("algorithm.name", alg)?;
            cfg.set("algorithm.t_max", "2000")?;
            let cells = parse_grid("paper", cfg.algorithm)?;
            let summary = grid_search(&cfg, &cells, Some(1e-2), true)?;
            let best = summary.best().expect("nonempty grid");
            println!(
                "beta_y {beta:>4} {alg:>5}: reaches 1e-2 at {:>5}  best {:?}",
                summary.best_hit().map_or("never".into(), |t| t.to_string()),
                best.overrides
            );
        }
    }
    Ok(())
}
