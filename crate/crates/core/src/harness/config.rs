//! Flat `key = value` run configuration.
//!
//! Grammar: one `key = value` pair per line; blank lines and lines starting
//! with `#` are ignored, as is anything after ` #` on a line. Keys carry a
//! section prefix (`problem.`, `graph.`, `algorithm.`, `output.`) except the
//! global `seed`. Unknown keys are rejected. See [`RunConfig::keys`] for the
//! full list with defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::rng::sub_seed;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    /// Gaussian features with labels from a random hyperplane.
    Synthetic {
        samples: usize,
        features: usize,
        flip_noise: f64,
    },
    Libsvm {
        path: PathBuf,
        zero_one_labels: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    ErdosRenyi,
    Ring,
    Path,
    Complete,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Generated { kind: GraphKind, edge_prob: f64 },
    /// Edge list plus optional mixing-matrix CSV; without the CSV the
    /// Laplacian weights of the edge list are used.
    File {
        edges: PathBuf,
        matrix: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    DGdMax,
    GdMax,
    Gda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Auto,
    Exact,
    Apg,
}

/// A stepsize or tolerance that is either the closed-form default or fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Setting {
    Default,
    Fixed(f64),
}

impl Setting {
    pub fn fixed(&self) -> Option<f64> {
        match self {
            Self::Default => None,
            Self::Fixed(v) => Some(*v),
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Default => write!(f, "paper"),
            Self::Fixed(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub source: ProblemSource,
    pub alpha: f64,
    pub beta_x: f64,
    pub beta_y: f64,
    pub radius: f64,
    pub agents: usize,
    pub data_seed: Option<u64>,
    pub partition_seed: Option<u64>,
    pub graph: GraphSource,
    pub graph_seed: Option<u64>,
    pub laplacian_scale: f64,
    pub algorithm: Algorithm,
    pub eta_x: Setting,
    pub eta_lambda: Setting,
    pub eta_y: f64,
    pub delta: Setting,
    pub t_max: usize,
    pub target: Option<f64>,
    pub solver: SolverChoice,
    pub subsolver_max_iters: usize,
    pub parallel: bool,
    /// `zero` or `random` (Gaussian from the `init` sub-seed).
    pub x0_random: bool,
    pub trace: Option<PathBuf>,
    pub flush_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            source: ProblemSource::Synthetic {
                samples: 200,
                features: 20,
                flip_noise: 0.1,
            },
            alpha: 10.0,
            beta_x: 1e-3,
            beta_y: 0.1,
            radius: 10.0,
            agents: 5,
            data_seed: None,
            partition_seed: None,
            graph: GraphSource::Generated {
                kind: GraphKind::ErdosRenyi,
                edge_prob: 0.3,
            },
            graph_seed: None,
            laplacian_scale: 0.8,
            algorithm: Algorithm::DGdMax,
            eta_x: Setting::Default,
            eta_lambda: Setting::Default,
            eta_y: 0.1,
            delta: Setting::Default,
            t_max: 1000,
            target: None,
            solver: SolverChoice::Auto,
            subsolver_max_iters: 100_000,
            parallel: false,
            x0_random: false,
            trace: None,
            flush_every: 100,
        }
    }
}

impl RunConfig {
    /// The small reference setup: 200 synthetic samples with 20 features
    /// spread over 5 agents on a ring.
    pub fn desk() -> Self {
        Self {
            graph: GraphSource::Generated {
                kind: GraphKind::Ring,
                edge_prob: 0.3,
            },
            ..Self::default()
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, HarnessError> {
    v.parse()
        .map_err(|_| HarnessError::Config(format!("`{key}`: cannot parse `{v}`")))
}

fn parse_setting(key: &str, v: &str) -> Result<Setting, HarnessError> {
    if v == "paper" || v == "default" {
        Ok(Setting::Default)
    } else {
        Ok(Setting::Fixed(parse(key, v)?))
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool, HarnessError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(HarnessError::Config(format!("`{key}`: expected a boolean, got `{v}`"))),
    }
}

fn opt_seed(key: &str, v: &str) -> Result<Option<u64>, HarnessError> {
    if v == "auto" {
        Ok(None)
    } else {
        Ok(Some(parse(key, v)?))
    }
}

fn show_seed(s: Option<u64>) -> String {
    s.map_or("auto".into(), |v| v.to_string())
}

impl RunConfig {
    /// Every accepted key.
    pub fn keys() -> &'static [&'static str] {
        &[
            "seed",
            "problem.source",
            "problem.path",
            "problem.zero_one_labels",
            "problem.samples",
            "problem.features",
            "problem.flip_noise",
            "problem.alpha",
            "problem.beta_x",
            "problem.beta_y",
            "problem.radius",
            "problem.agents",
            "problem.data_seed",
            "problem.partition_seed",
            "graph.kind",
            "graph.edge_prob",
            "graph.seed",
            "graph.edges",
            "graph.matrix",
            "graph.scale",
            "algorithm.name",
            "algorithm.eta_x",
            "algorithm.eta_lambda",
            "algorithm.eta_y",
            "algorithm.delta",
            "algorithm.t_max",
            "algorithm.target",
            "algorithm.dual_solver",
            "algorithm.subsolver_max_iters",
            "algorithm.parallel",
            "algorithm.x0",
            "output.trace",
            "output.flush_every",
        ]
    }

    pub fn parse_str(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split(" #").next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected `key = value`", k + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), ()).is_some() {
                return Err(HarnessError::Config(format!("line {}: duplicate key `{key}`", k + 1)));
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    /// Apply one `key = value` override.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), HarnessError> {
        match key {
            "seed" => self.seed = parse(key, v)?,
            "problem.source" => {
                self.source = match v {
                    "synthetic" => ProblemSource::Synthetic {
                        samples: 200,
                        features: 20,
                        flip_noise: 0.1,
                    },
                    "libsvm" => ProblemSource::Libsvm {
                        path: PathBuf::new(),
                        zero_one_labels: false,
                    },
                    _ => return Err(HarnessError::Config(format!("unknown problem.source `{v}`"))),
                }
            }
            "problem.path" | "problem.zero_one_labels" => match &mut self.source {
                ProblemSource::Libsvm {
                    path,
                    zero_one_labels,
                } => {
                    if key == "problem.path" {
                        *path = PathBuf::from(v);
                    } else {
                        *zero_one_labels = parse_bool(key, v)?;
                    }
                }
                _ => {
                    return Err(HarnessError::Config(format!(
                        "`{key}` needs `problem.source = libsvm` first"
                    )))
                }
            },
            "problem.samples" | "problem.features" | "problem.flip_noise" => match &mut self.source {
                ProblemSource::Synthetic {
                    samples,
                    features,
                    flip_noise,
                } => match key {
                    "problem.samples" => *samples = parse(key, v)?,
                    "problem.features" => *features = parse(key, v)?,
                    _ => *flip_noise = parse(key, v)?,
                },
                _ => {
                    return Err(HarnessError::Config(format!(
                        "`{key}` applies only to synthetic problems"
                    )))
                }
            },
            "problem.alpha" => self.alpha = parse(key, v)?,
            "problem.beta_x" => self.beta_x = parse(key, v)?,
            "problem.beta_y" => self.beta_y = parse(key, v)?,
            "problem.radius" => self.radius = parse(key, v)?,
            "problem.agents" => self.agents = parse(key, v)?,
            "problem.data_seed" => self.data_seed = opt_seed(key, v)?,
            "problem.partition_seed" => self.partition_seed = opt_seed(key, v)?,
            "graph.kind" => {
                let kind = match v {
                    "erdos_renyi" => GraphKind::ErdosRenyi,
                    "ring" => GraphKind::Ring,
                    "path" => GraphKind::Path,
                    "complete" => GraphKind::Complete,
                    "file" => {
                        self.graph = GraphSource::File {
                            edges: PathBuf::new(),
                            matrix: None,
                        };
                        return Ok(());
                    }
                    _ => return Err(HarnessError::Config(format!("unknown graph.kind `{v}`"))),
                };
                let edge_prob = match self.graph {
                    GraphSource::Generated { edge_prob, .. } => edge_prob,
                    _ => 0.3,
                };
                self.graph = GraphSource::Generated { kind, edge_prob };
            }
            "graph.edge_prob" => match &mut self.graph {
                GraphSource::Generated { edge_prob, .. } => *edge_prob = parse(key, v)?,
                _ => return Err(HarnessError::Config("`graph.edge_prob` needs a generated graph".into())),
            },
            "graph.edges" | "graph.matrix" => match &mut self.graph {
                GraphSource::File { edges, matrix } => {
                    if key == "graph.edges" {
                        *edges = PathBuf::from(v);
                    } else {
                        *matrix = Some(PathBuf::from(v));
                    }
                }
                _ => return Err(HarnessError::Config(format!("`{key}` needs `graph.kind = file` first"))),
            },
            "graph.seed" => self.graph_seed = opt_seed(key, v)?,
            "graph.scale" => self.laplacian_scale = parse(key, v)?,
            "algorithm.name" => {
                self.algorithm = match v {
                    "dgdmax" => Algorithm::DGdMax,
                    "gdmax" => Algorithm::GdMax,
                    "gda" => Algorithm::Gda,
                    _ => return Err(HarnessError::Config(format!("unknown algorithm `{v}`"))),
                }
            }
            "algorithm.eta_x" => self.eta_x = parse_setting(key, v)?,
            "algorithm.eta_lambda" => self.eta_lambda = parse_setting(key, v)?,
            "algorithm.eta_y" => self.eta_y = parse(key, v)?,
            "algorithm.delta" => self.delta = parse_setting(key, v)?,
            "algorithm.t_max" => self.t_max = parse(key, v)?,
            "algorithm.target" => {
                self.target = if v == "none" { None } else { Some(parse(key, v)?) }
            }
            "algorithm.dual_solver" => {
                self.solver = match v {
                    "auto" => SolverChoice::Auto,
                    "exact" => SolverChoice::Exact,
                    "apg" => SolverChoice::Apg,
                    _ => return Err(HarnessError::Config(format!("unknown dual_solver `{v}`"))),
                }
            }
            "algorithm.subsolver_max_iters" => self.subsolver_max_iters = parse(key, v)?,
            "algorithm.parallel" => self.parallel = parse_bool(key, v)?,
            "algorithm.x0" => {
                self.x0_random = match v {
                    "zero" => false,
                    "random" => true,
                    _ => return Err(HarnessError::Config(format!("algorithm.x0 must be zero or random, got `{v}`"))),
                }
            }
            "output.trace" => self.trace = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            "output.flush_every" => self.flush_every = parse(key, v)?,
            _ => return Err(HarnessError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: &str| Err(HarnessError::Config(m.into()));
        if !(self.beta_y > 0.0) {
            return fail("problem.beta_y must be positive");
        }
        if self.beta_x < 0.0 || self.alpha < 0.0 || !(self.radius > 0.0) {
            return fail("need beta_x >= 0, alpha >= 0 and radius > 0");
        }
        if self.t_max < 1 {
            return fail("algorithm.t_max must be at least 1");
        }
        if self.agents < 1 {
            return fail("problem.agents must be at least 1");
        }
        if let ProblemSource::Synthetic {
            samples,
            features,
            flip_noise,
        } = self.source
        {
            if samples < 2 || features < 1 || !(0.0..=1.0).contains(&flip_noise) {
                return fail("synthetic data needs samples >= 2, features >= 1, flip_noise in [0, 1]");
            }
        }
        if let ProblemSource::Libsvm { path, .. } = &self.source {
            if path.as_os_str().is_empty() {
                return fail("problem.path is required for libsvm problems");
            }
        }
        if let GraphSource::File { edges, .. } = &self.graph {
            if edges.as_os_str().is_empty() {
                return fail("graph.edges is required when graph.kind = file");
            }
        }
        if let GraphSource::Generated { edge_prob, .. } = self.graph {
            if !(0.0..=1.0).contains(&edge_prob) {
                return fail("graph.edge_prob must lie in [0, 1]");
            }
        }
        if !(self.laplacian_scale > 0.0 && self.laplacian_scale <= 1.0) {
            return fail("graph.scale must lie in (0, 1]");
        }
        for (name, s) in [("eta_x", self.eta_x), ("eta_lambda", self.eta_lambda), ("delta", self.delta)] {
            if let Setting::Fixed(v) = s {
                if !(v >= 0.0) || (name == "eta_x" && v == 0.0) {
                    return Err(HarnessError::Config(format!("algorithm.{name} must be positive")));
                }
            }
        }
        if !(self.eta_y > 0.0) {
            return fail("algorithm.eta_y must be positive");
        }
        if self.flush_every == 0 {
            return fail("output.flush_every must be positive");
        }
        Ok(())
    }

    /// Number of agents actually simulated; the single-node methods pool
    /// all data on one agent.
    pub fn effective_agents(&self) -> usize {
        match self.algorithm {
            Algorithm::DGdMax => self.agents,
            _ => 1,
        }
    }

    pub fn data_seed(&self) -> u64 {
        self.data_seed.unwrap_or_else(|| sub_seed(self.seed, "data"))
    }

    pub fn partition_seed(&self) -> u64 {
        self.partition_seed.unwrap_or_else(|| sub_seed(self.seed, "partition"))
    }

    pub fn graph_seed(&self) -> u64 {
        self.graph_seed.unwrap_or_else(|| sub_seed(self.seed, "graph"))
    }

    pub fn init_seed(&self) -> u64 {
        sub_seed(self.seed, "init")
    }

    /// Resolved `(key, value)` pairs of every non-output setting, in
    /// [`keys`](Self::keys) order.
    pub fn resolved_pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| out.push((k.to_string(), v));
        put("seed", self.seed.to_string());
        match &self.source {
            ProblemSource::Synthetic {
                samples,
                features,
                flip_noise,
            } => {
                put("problem.source", "synthetic".into());
                put("problem.samples", samples.to_string());
                put("problem.features", features.to_string());
                put("problem.flip_noise", flip_noise.to_string());
            }
            ProblemSource::Libsvm {
                path,
                zero_one_labels,
            } => {
                put("problem.source", "libsvm".into());
                put("problem.path", path.display().to_string());
                put("problem.zero_one_labels", zero_one_labels.to_string());
            }
        }
        put("problem.alpha", self.alpha.to_string());
        put("problem.beta_x", self.beta_x.to_string());
        put("problem.beta_y", self.beta_y.to_string());
        put("problem.radius", self.radius.to_string());
        put("problem.agents", self.agents.to_string());
        put("problem.data_seed", show_seed(self.data_seed));
        put("problem.partition_seed", show_seed(self.partition_seed));
        match &self.graph {
            GraphSource::Generated { kind, edge_prob } => {
                let k = match kind {
                    GraphKind::ErdosRenyi => "erdos_renyi",
                    GraphKind::Ring => "ring",
                    GraphKind::Path => "path",
                    GraphKind::Complete => "complete",
                };
                put("graph.kind", k.into());
                put("graph.edge_prob", edge_prob.to_string());
            }
            GraphSource::File { edges, matrix } => {
                put("graph.kind", "file".into());
                put("graph.edges", edges.display().to_string());
                if let Some(m) = matrix {
                    put("graph.matrix", m.display().to_string());
                }
            }
        }
        put("graph.seed", show_seed(self.graph_seed));
        put("graph.scale", self.laplacian_scale.to_string());
        let name = match self.algorithm {
            Algorithm::DGdMax => "dgdmax",
            Algorithm::GdMax => "gdmax",
            Algorithm::Gda => "gda",
        };
        put("algorithm.name", name.into());
        put("algorithm.eta_x", self.eta_x.to_string());
        put("algorithm.eta_lambda", self.eta_lambda.to_string());
        put("algorithm.eta_y", self.eta_y.to_string());
        put("algorithm.delta", self.delta.to_string());
        put("algorithm.t_max", self.t_max.to_string());
        put(
            "algorithm.target",
            self.target.map_or("none".into(), |v| v.to_string()),
        );
        let solver = match self.solver {
            SolverChoice::Auto => "auto",
            SolverChoice::Exact => "exact",
            SolverChoice::Apg => "apg",
        };
        put("algorithm.dual_solver", solver.into());
        put("algorithm.subsolver_max_iters", self.subsolver_max_iters.to_string());
        put("algorithm.parallel", self.parallel.to_string());
        put("algorithm.x0", if self.x0_random { "random" } else { "zero" }.into());
        out
    }

    /// Canonical text form: one `key = value` line per resolved pair.
    pub fn canonical_text(&self) -> String {
        config_text(&self.resolved_pairs())
    }

    /// SHA-256 of [`canonical_text`](Self::canonical_text), hex encoded.
    pub fn hash(&self) -> String {
        hash_pairs(&self.resolved_pairs())
    }
}

pub fn config_text(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Hash of resolved pairs as they appear in a trace header.
pub fn hash_pairs(pairs: &[(String, String)]) -> String {
    let digest = Sha256::digest(config_text(pairs).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
