use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::time::Instant;

use super::config::{Algorithm, GraphKind, GraphSource, ProblemSource, Setting, SolverChoice};
use super::{gen_synthetic, HarnessError, RunConfig, TraceRow, TraceWriter};
use crate::graph::{laplacian_mixing, read_mixing_csv, Graph, MixingMatrix, DEFAULT_RETRY_CAP};
use crate::metrics::{prox_grad_mapping, stationarity};
use crate::optim::{
    default_stepsizes, CentralState, DGdMax, DeltaSchedule, DualSolver, Gda, GdMax, OptimError,
    Schedule,
};
use crate::problem::{parse_libsvm, DrlrInstance, DrlrParams, LibsvmOptions, MinimaxProblem, Partition};
use crate::rng::SeedStream;

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// All `t_max` rounds recorded.
    Completed,
    /// Early stop at the recorded round once every measure was below target.
    TargetReached { round: usize },
    Diverged { round: usize },
    SubsolverBudget { round: usize },
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::TargetReached { .. } => "target_reached",
            Self::Diverged { .. } => "diverged",
            Self::SubsolverBudget { .. } => "subsolver_budget",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub status: RunStatus,
    /// Recorded rows; empty when rows were not kept.
    pub rows: Vec<TraceRow>,
    /// Last non-divergence row.
    pub last: Option<TraceRow>,
    pub config_hash: String,
}

/// A fully constructed run: problem, network and schedule.
pub struct Experiment {
    pub config: RunConfig,
    pub problem: DrlrInstance,
    pub graph: Option<Graph>,
    pub mixing: MixingMatrix,
    pub schedule: Schedule,
    pub x0: Vec<f64>,
}

fn build_mixing(cfg: &RunConfig, m: usize) -> Result<(Option<Graph>, MixingMatrix), HarnessError> {
    if m == 1 {
        return Ok((Some(Graph::new(1, [])?), MixingMatrix::single_agent()));
    }
    let graph = match &cfg.graph {
        GraphSource::Generated { kind, edge_prob } => match kind {
            GraphKind::ErdosRenyi => Graph::erdos_renyi(m, *edge_prob, cfg.graph_seed(), DEFAULT_RETRY_CAP)?,
            GraphKind::Ring => Graph::ring(m)?,
            GraphKind::Path => Graph::path(m)?,
            GraphKind::Complete => Graph::complete(m)?,
        },
        GraphSource::File { edges, matrix } => {
            let g = Graph::read_edge_list(BufReader::new(File::open(edges)?))?;
            if g.node_count() != m {
                return Err(HarnessError::Config(format!(
                    "graph file has {} nodes but problem.agents = {m}",
                    g.node_count()
                )));
            }
            if let Some(path) = matrix {
                let w = read_mixing_csv(BufReader::new(File::open(path)?))?;
                if w.size() != m {
                    return Err(HarnessError::Config(format!(
                        "mixing matrix is {0}x{0} but problem.agents = {m}",
                        w.size()
                    )));
                }
                return Ok((Some(g), w));
            }
            g
        }
    };
    let w = laplacian_mixing(&graph, cfg.laplacian_scale)?;
    Ok((Some(graph), w))
}

impl Experiment {
    pub fn build(cfg: &RunConfig) -> Result<Self, HarnessError> {
        cfg.validate()?;
        let data = match &cfg.source {
            ProblemSource::Synthetic {
                samples,
                features,
                flip_noise,
            } => gen_synthetic(*features, *samples, *flip_noise, cfg.data_seed())?,
            ProblemSource::Libsvm {
                path,
                zero_one_labels,
            } => {
                let opts = LibsvmOptions {
                    zero_one_labels: *zero_one_labels,
                    feature_dim: None,
                };
                parse_libsvm(BufReader::new(File::open(path)?), opts)?
            }
        };
        let m = cfg.effective_agents();
        let partition = if m == 1 {
            Partition::single(data.sample_count())
        } else {
            Partition::random(data.sample_count(), m, cfg.partition_seed())?
        };
        let params = DrlrParams {
            alpha: cfg.alpha,
            beta_x: cfg.beta_x,
            beta_y: cfg.beta_y,
            radius: cfg.radius,
            ..DrlrParams::default()
        };
        let problem = DrlrInstance::new(data, partition, params)?;
        let (graph, mixing) = build_mixing(cfg, m)?;
        let c = problem.constants();
        let mut schedule = Schedule::with_overrides(&c, mixing.rho(), cfg.eta_x.fixed(), cfg.eta_lambda.fixed())?;
        if cfg.algorithm != Algorithm::DGdMax && cfg.eta_x == Setting::Default {
            schedule.eta_x = default_stepsizes(c.l, c.kappa(), 0.0)?.0;
        }
        if let Setting::Fixed(d) = cfg.delta {
            schedule.delta = DeltaSchedule::Constant(d);
        }
        let n = problem.primal_dim();
        let x0 = if cfg.x0_random {
            let mut rng = SeedStream::new(cfg.init_seed());
            (0..n).map(|_| rng.gaussian()).collect()
        } else {
            vec![0.0; n]
        };
        Ok(Self {
            config: cfg.clone(),
            problem,
            graph,
            mixing,
            schedule,
            x0,
        })
    }

    /// Computed constants recorded in trace headers.
    /// `||V^0 - 1 v_avg^T||_F^2` for network runs; `None` if the first dual
    /// solve fails or the run is single-node.
    fn initial_tracker_spread(&self) -> Option<f64> {
        if self.config.algorithm != Algorithm::DGdMax {
            return None;
        }
        let method = DGdMax::new(&self.problem, &self.mixing, self.schedule)
            .ok()?
            .with_solver(self.solver());
        let (s, _) = method.init(&self.x0).ok()?;
        let avg = crate::linalg::AgentMatrix::broadcast(s.v.rows(), &s.v.mean_row());
        Some(s.v.sub(&avg).frobenius().powi(2))
    }

    pub fn derived(&self) -> Vec<(String, String)> {
        let c = self.problem.constants();
        let lip = self.problem.lipschitz();
        let mut out = vec![
            ("agents", self.problem.agents().to_string()),
            ("samples", self.problem.dual_dim().to_string()),
            ("features", self.problem.primal_dim().to_string()),
            ("L", c.l.to_string()),
            ("L_analytic", lip.analytic.to_string()),
            ("L_sampled", lip.sampled.to_string()),
            ("mu", c.mu.to_string()),
            ("L_y", c.l_y.to_string()),
            ("kappa", c.kappa().to_string()),
            ("kappa_y", c.kappa_y().to_string()),
            ("rho", self.mixing.rho().to_string()),
            ("norm_w_minus_i", self.mixing.op_norm_w_minus_i().to_string()),
            ("eta_x", self.schedule.eta_x.to_string()),
            ("eta_lambda", self.schedule.eta_lambda.to_string()),
        ];
        if let Some(g) = &self.graph {
            out.push(("edges", g.edge_count().to_string()));
        }
        if let Some(spread) = self.initial_tracker_spread() {
            let m = self.problem.agents() as f64;
            let bound = 2.0 * m * c.l * c.kappa() * (1.0 - self.mixing.rho());
            out.push(("tracker_spread_0_sq", spread.to_string()));
            out.push(("tracker_spread_0_sq_bound", bound.to_string()));
        }
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    fn solver(&self) -> DualSolver {
        let max_iters = self.config.subsolver_max_iters;
        match self.config.solver {
            SolverChoice::Auto => DualSolver::Auto { max_iters },
            SolverChoice::Exact => DualSolver::Exact,
            SolverChoice::Apg => DualSolver::Apg { max_iters },
        }
    }

    /// Run and write the trace to `config.trace` when set.
    pub fn run(&self) -> Result<RunOutcome, HarnessError> {
        match &self.config.trace {
            Some(path) => {
                if let Some(dir) = path.parent() {
                    if !dir.as_os_str().is_empty() {
                        std::fs::create_dir_all(dir)?;
                    }
                }
                let out = BufWriter::new(File::create(path)?);
                self.run_with(Some(out), true)
            }
            None => self.run_with(None::<std::io::Sink>, true),
        }
    }

    /// Run, streaming rows to `sink` and optionally keeping them in memory.
    pub fn run_with<W: Write>(&self, sink: Option<W>, keep_rows: bool) -> Result<RunOutcome, HarnessError> {
        let cfg = &self.config;
        let hash = cfg.hash();
        let mut writer = match sink {
            Some(w) => Some(TraceWriter::new(w, &cfg.resolved_pairs(), &hash, &self.derived(), cfg.flush_every)?),
            None => None,
        };
        let mut rows = Vec::new();
        let mut last = None;
        let start = Instant::now();
        let mut emit = |row: TraceRow, writer: &mut Option<TraceWriter<W>>| -> Result<(), HarnessError> {
            if let Some(w) = writer.as_mut() {
                w.push(&row)?;
            }
            if !row.is_divergence_row() {
                last = Some(row.clone());
            }
            if keep_rows {
                rows.push(row);
            }
            Ok(())
        };
        let elapsed = |s: &Instant| s.elapsed().as_secs_f64() * 1e3;

        let result = match cfg.algorithm {
            Algorithm::DGdMax => self.drive_network(&mut |r| emit(r, &mut writer), &start, &elapsed),
            Algorithm::GdMax | Algorithm::Gda => self.drive_central(&mut |r| emit(r, &mut writer), &start, &elapsed),
        };
        let status = match result {
            Ok(s) => s,
            Err(Stop::Optim(OptimError::Diverged { round })) => {
                emit(TraceRow::diverged(round, elapsed(&start)), &mut writer)?;
                RunStatus::Diverged { round }
            }
            Err(Stop::Optim(OptimError::SubsolverBudget { round, .. })) => RunStatus::SubsolverBudget { round },
            Err(Stop::Optim(e)) => return Err(e.into()),
            Err(Stop::Harness(e)) => return Err(e),
        };
        if let Some(w) = writer {
            let note = match status {
                RunStatus::Completed => None,
                RunStatus::TargetReached { round } => Some(format!("target reached at round {round}")),
                RunStatus::Diverged { round } => Some(format!("diverged at round {round}")),
                RunStatus::SubsolverBudget { round } => {
                    Some(format!("subsolver budget exhausted at round {round}"))
                }
            };
            w.finish(note.as_deref())?;
        }
        Ok(RunOutcome {
            status,
            rows,
            last,
            config_hash: hash,
        })
    }

    fn drive_network(
        &self,
        emit: &mut dyn FnMut(TraceRow) -> Result<(), HarnessError>,
        start: &Instant,
        elapsed: &dyn Fn(&Instant) -> f64,
    ) -> Result<RunStatus, Stop> {
        let cfg = &self.config;
        let method = DGdMax::new(&self.problem, &self.mixing, self.schedule)?
            .with_solver(self.solver())
            .parallel(cfg.parallel);
        let (mut state, mut info) = method.init(&self.x0)?;
        loop {
            let rep = stationarity(&self.problem, &self.mixing, &state, self.schedule.eta_x)
                .map_err(HarnessError::from)?;
            emit(TraceRow {
                t: state.t,
                prox_grad_big_p: rep.prox_grad_norm_big_p,
                prox_grad_p: rep.prox_grad_norm_p,
                consensus_x: rep.consensus_x_raw,
                consensus_x_scaled: rep.consensus_x,
                lambda_grad: rep.lambda_grad_norm,
                lambda_grad_is_surrogate: rep.lambda_grad_is_surrogate,
                tracking_residual: rep.tracking_residual,
                subsolver_iters: info.subsolver_iters,
                delta_t: info.delta,
                wall_ms: elapsed(start),
            })?;
            if let Some(eps) = cfg.target {
                if rep.prox_grad_norm_big_p <= eps && rep.consensus_x <= eps && rep.lambda_grad_norm <= eps {
                    return Ok(RunStatus::TargetReached { round: state.t });
                }
            }
            if state.t + 1 >= cfg.t_max {
                return Ok(RunStatus::Completed);
            }
            (state, info) = method.step(&state)?;
        }
    }

    fn drive_central(
        &self,
        emit: &mut dyn FnMut(TraceRow) -> Result<(), HarnessError>,
        start: &Instant,
        elapsed: &dyn Fn(&Instant) -> f64,
    ) -> Result<RunStatus, Stop> {
        let cfg = &self.config;
        let p = &self.problem;
        let eta = self.schedule.eta_x;
        let mut gdmax = GdMax::new(p, eta);
        gdmax.solver = self.solver();
        let gda = Gda::new(p, eta, cfg.eta_y);
        let mut state = match cfg.algorithm {
            Algorithm::GdMax => gdmax.init(&self.x0)?,
            _ => CentralState {
                t: 0,
                x: self.x0.clone(),
                y: p.dual_term().prox(&vec![0.0; p.dual_dim()], 1.0),
            },
        };
        loop {
            let current = prox_grad_mapping(p, &state.x, eta, &p.mean_grad_x(&state.x, &state.y))
                .map_err(HarnessError::from)?;
            let exact = match p.pooled_exact_dual(&state.x) {
                Some(y) => Some(
                    prox_grad_mapping(p, &state.x, eta, &p.mean_grad_x(&state.x, &y))
                        .map_err(HarnessError::from)?,
                ),
                None => None,
            };
            emit(TraceRow {
                t: state.t,
                prox_grad_big_p: current,
                prox_grad_p: exact,
                consensus_x: 0.0,
                consensus_x_scaled: 0.0,
                lambda_grad: 0.0,
                lambda_grad_is_surrogate: false,
                tracking_residual: 0.0,
                subsolver_iters: 0,
                delta_t: 0.0,
                wall_ms: elapsed(start),
            })?;
            if let Some(eps) = cfg.target {
                if exact.unwrap_or(current) <= eps {
                    return Ok(RunStatus::TargetReached { round: state.t });
                }
            }
            if state.t + 1 >= cfg.t_max {
                return Ok(RunStatus::Completed);
            }
            state = match cfg.algorithm {
                Algorithm::GdMax => gdmax.step(&state)?,
                _ => gda.step(&state)?,
            };
        }
    }
}

enum Stop {
    Optim(OptimError),
    Harness(HarnessError),
}

impl From<OptimError> for Stop {
    fn from(e: OptimError) -> Self {
        Self::Optim(e)
    }
}

impl From<HarnessError> for Stop {
    fn from(e: HarnessError) -> Self {
        Self::Harness(e)
    }
}

/// Build and run `cfg`, writing its trace when `output.trace` is set.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutcome, HarnessError> {
    Experiment::build(cfg)?.run()
}
