//! Stepsize grid over the single-machine baseline, with one divergent cell.

use dgdmax::harness::{grid_search, parse_grid, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = RunConfig::default();
    cfg.set("algorithm.name", "gda")?;
    cfg.set("algorithm.t_max", "300")?;
    let cells = parse_grid("eta_x=0.001,0.01,0.1,1e9;eta_y=0.1,0.5", cfg.algorithm)?;
    let summary = grid_search(&cfg, &cells, Some(5e-2), false)?;
    summary.write_csv(std::io::stdout().lock())?;
    Ok(())
}
