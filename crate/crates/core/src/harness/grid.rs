//! Stepsize grid search.
//!
//! Grid syntax: `key=v1,v2;key2=w1,w2` expands to the Cartesian product with
//! the first key varying slowest. Keys without a section prefix are taken
//! from the `algorithm.` section. The word `paper` expands to the stepsize
//! sets for the configured algorithm over [`PAPER_STEPSIZES`].

use std::io::Write;

use rayon::prelude::*;

use super::config::Algorithm;
use super::{Experiment, HarnessError, RunConfig, RunStatus};

/// Candidate stepsizes of the reference experiments.
pub const PAPER_STEPSIZES: [f64; 6] = [0.5, 0.1, 0.05, 0.01, 0.005, 0.001];

/// One grid point: the overrides applied to the base configuration.
pub type Cell = Vec<(String, String)>;

pub fn parse_grid(spec: &str, algorithm: Algorithm) -> Result<Vec<Cell>, HarnessError> {
    let spec = spec.trim();
    let axes: Vec<(String, Vec<String>)> = if spec == "paper" {
        let set: Vec<String> = PAPER_STEPSIZES.iter().map(|v| v.to_string()).collect();
        let keys: &[&str] = match algorithm {
            Algorithm::GdMax => &["algorithm.eta_x"],
            Algorithm::Gda => &["algorithm.eta_x", "algorithm.eta_y"],
            Algorithm::DGdMax => &["algorithm.eta_x", "algorithm.eta_lambda"],
        };
        keys.iter().map(|k| (k.to_string(), set.clone())).collect()
    } else {
        spec.split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|axis| {
                let (k, vs) = axis
                    .split_once('=')
                    .ok_or_else(|| HarnessError::Config(format!("grid axis `{axis}` lacks `=`")))?;
                let k = k.trim();
                let key = if k.contains('.') || k == "seed" {
                    k.to_string()
                } else {
                    format!("algorithm.{k}")
                };
                let values: Vec<String> = vs
                    .split(',')
                    .map(|v| v.trim().to_string())
                    .filter(|v| !v.is_empty())
                    .collect();
                if values.is_empty() {
                    return Err(HarnessError::Config(format!("grid axis `{key}` has no values")));
                }
                Ok((key, values))
            })
            .collect::<Result<_, _>>()?
    };
    if axes.is_empty() {
        return Err(HarnessError::Config("empty grid".into()));
    }
    let mut cells: Vec<Cell> = vec![vec![]];
    for (key, values) in &axes {
        cells = cells
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub index: usize,
    pub overrides: Cell,
    /// `None` when the cell failed before running (e.g. a bad value).
    pub status: Option<RunStatus>,
    pub error: Option<String>,
    /// Rounds recorded.
    pub rounds: usize,
    /// Primary metric of the last finite row.
    pub final_metric: f64,
    /// First recorded round whose primary metric is at or below the target.
    pub hit_round: Option<usize>,
    /// 1-based rank; 1 is best.
    pub rank: usize,
}

impl CellResult {
    fn sort_key(&self) -> (u8, f64, usize) {
        match self.status {
            _ if self.hit_round.is_some() => (0, self.hit_round.unwrap() as f64, self.index),
            Some(RunStatus::Completed) | Some(RunStatus::TargetReached { .. }) => {
                let v = if self.final_metric.is_nan() { f64::INFINITY } else { self.final_metric };
                (1, v, self.index)
            }
            Some(RunStatus::SubsolverBudget { .. }) => (2, 0.0, self.index),
            _ => (3, 0.0, self.index),
        }
    }

    pub fn diverged(&self) -> bool {
        matches!(self.status, Some(RunStatus::Diverged { .. }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSummary {
    /// In grid order.
    pub cells: Vec<CellResult>,
}

impl GridSummary {
    pub fn best(&self) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.rank == 1)
    }

    /// Smallest hitting round over all cells.
    pub fn best_hit(&self) -> Option<usize> {
        self.cells.iter().filter_map(|c| c.hit_round).min()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cell", "overrides", "status", "rounds", "hit_round", "final_metric", "rank", "best"])?;
        for c in &self.cells {
            let overrides: Vec<String> = c.overrides.iter().map(|(k, v)| format!("{k}={v}")).collect();
            w.write_record([
                c.index.to_string(),
                overrides.join(";"),
                c.status.map_or_else(|| "error".to_string(), |s| s.label().to_string()),
                c.rounds.to_string(),
                c.hit_round.map_or(String::new(), |h| h.to_string()),
                c.final_metric.to_string(),
                c.rank.to_string(),
                (c.rank == 1).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn run_cell(base: &RunConfig, index: usize, overrides: &Cell, target: Option<f64>) -> CellResult {
    let mut res = CellResult {
        index,
        overrides: overrides.clone(),
        status: None,
        error: None,
        rounds: 0,
        final_metric: f64::NAN,
        hit_round: None,
        rank: 0,
    };
    let mut cfg = base.clone();
    cfg.trace = None;
    let outcome = overrides
        .iter()
        .try_for_each(|(k, v)| cfg.set(k, v))
        .and_then(|_| Experiment::build(&cfg))
        .and_then(|e| e.run_with(None::<std::io::Sink>, true));
    match outcome {
        Ok(o) => {
            res.status = Some(o.status);
            res.rounds = o.rows.iter().filter(|r| !r.is_divergence_row()).count();
            res.final_metric = o.last.as_ref().map_or(f64::NAN, |r| r.primary_metric());
            if let Some(eps) = target {
                res.hit_round = o
                    .rows
                    .iter()
                    .find(|r| !r.is_divergence_row() && r.primary_metric() <= eps)
                    .map(|r| r.t);
            }
        }
        Err(e) => res.error = Some(e.to_string()),
    }
    res
}

/// Run every cell of `cells` on top of `base`.
///
/// Cells run independently (in parallel when `parallel`); one cell's failure
/// never stops the others. Cells that reach `target` (on the original-problem
/// gradient mapping) rank first by hitting round; the rest rank by final
/// metric; subsolver failures, divergent and failed cells rank last.
pub fn grid_search(
    base: &RunConfig,
    cells: &[Cell],
    target: Option<f64>,
    parallel: bool,
) -> Result<GridSummary, HarnessError> {
    if cells.is_empty() {
        return Err(HarnessError::Config("empty grid".into()));
    }
    let mut results: Vec<CellResult> = if parallel {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, c)| run_cell(base, i, c, target))
            .collect()
    } else {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| run_cell(base, i, c, target))
            .collect()
    };
    let mut order: Vec<usize> = (0..results.len()).collect();
    order.sort_by(|&a, &b| {
        let (ka, kb) = (results[a].sort_key(), results[b].sort_key());
        ka.0.cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(ka.2.cmp(&kb.2))
    });
    for (rank, &i) in order.iter().enumerate() {
        results[i].rank = rank + 1;
    }
    Ok(GridSummary { cells: results })
}
