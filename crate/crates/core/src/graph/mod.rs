//! Communication graphs and gossip (mixing) matrices.
//!
//! Graphs are undirected and simple. [`laplacian_mixing`] builds the
//! `W = I - s L / lambda_max(L)` weights used by the decentralized solver;
//! [`validate_mixing`] reports on the four consensus conditions a mixing
//! matrix has to satisfy.

mod mixing;
mod spectral;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::rng::SeedStream;

pub use mixing::{
    laplacian_mixing, read_mixing_csv, validate_mixing, write_mixing_csv, ConditionCheck,
    MixingMatrix, ValidationReport, DEFAULT_LAPLACIAN_SCALE,
};
pub use spectral::{largest_eigenvalue_psd, largest_singular_value, spectral_radius_deviation};

/// Default number of Erdős–Rényi draws before giving up on connectivity.
pub const DEFAULT_RETRY_CAP: usize = 1000;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    NodeOutOfRange(usize, usize, usize),
    #[error("edge probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("no connected sample after {attempts} draws (m = {nodes}, p = {prob}); p is too small")]
    RetriesExhausted {
        nodes: usize,
        prob: f64,
        attempts: usize,
    },
    #[error("graph is disconnected: W - I would have a null space larger than span(1)")]
    Disconnected,
    #[error("laplacian scale {0} outside (0, 1]")]
    BadScale(f64),
    #[error("dimension mismatch: matrix is {matrix}x{matrix}, graph has {nodes} nodes")]
    DimensionMismatch { matrix: usize, nodes: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Simple undirected graph on nodes `0..node_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Build a graph from an edge list. Each pair is stored as `(min, max)`;
    /// self-loops and repeated pairs are rejected.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= node_count || b >= node_count {
                return Err(GraphError::NodeOutOfRange(a, b, node_count));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(GraphError::DuplicateEdge(e.0, e.1));
            }
        }
        Ok(Self {
            node_count,
            edges: set,
        })
    }

    pub fn ring(node_count: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = match node_count {
            0 | 1 => vec![],
            2 => vec![(0, 1)],
            m => (0..m).map(|i| (i, (i + 1) % m)).collect(),
        };
        Self::new(node_count, edges)
    }

    pub fn path(node_count: usize) -> Result<Self, GraphError> {
        Self::new(node_count, (1..node_count).map(|i| (i - 1, i)))
    }

    pub fn complete(node_count: usize) -> Result<Self, GraphError> {
        Self::new(
            node_count,
            (0..node_count).flat_map(|i| (i + 1..node_count).map(move |j| (i, j))),
        )
    }

    /// Connected Erdős–Rényi graph `G(m, p)`.
    ///
    /// Each draw visits the pairs `(i, j)`, `i < j`, in lexicographic order
    /// and keeps the pair when `next_f64() < p`. Disconnected draws are
    /// discarded and the same stream continues, up to `retry_cap` draws.
    pub fn erdos_renyi(
        node_count: usize,
        prob: f64,
        seed: u64,
        retry_cap: usize,
    ) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::Empty);
        }
        if !(0.0..=1.0).contains(&prob) {
            return Err(GraphError::BadProbability(prob));
        }
        let mut rng = SeedStream::new(seed);
        for _ in 0..retry_cap {
            let mut edges = BTreeSet::new();
            for i in 0..node_count {
                for j in i + 1..node_count {
                    if rng.next_f64() < prob {
                        edges.insert((i, j));
                    }
                }
            }
            let g = Self { node_count, edges };
            if g.is_connected() {
                return Ok(g);
            }
        }
        Err(GraphError::RetriesExhausted {
            nodes: node_count,
            prob,
            attempts: retry_cap,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors().iter().map(Vec::len).collect()
    }

    /// Breadth-first reachability from node 0.
    pub fn is_connected(&self) -> bool {
        let adj = self.neighbors();
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.node_count
    }

    /// Graph Laplacian `D - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let m = self.node_count;
        let mut lap = DMatrix::zeros(m, m);
        for &(a, b) in &self.edges {
            lap[(a, b)] = -1.0;
            lap[(b, a)] = -1.0;
            lap[(a, a)] += 1.0;
            lap[(b, b)] += 1.0;
        }
        lap
    }

    /// Edge-list text: a `# nodes=<m>` line, then one `i j` pair per line.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<(), GraphError> {
        writeln!(out, "# nodes={}", self.node_count)?;
        for &(a, b) in &self.edges {
            writeln!(out, "{a} {b}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self, GraphError> {
        let mut nodes = None;
        let mut edges = Vec::new();
        for (k, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = k + 1;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(rest) = t.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("nodes=") {
                    nodes = Some(v.trim().parse::<usize>().map_err(|e| GraphError::Parse {
                        line: lineno,
                        msg: e.to_string(),
                    })?);
                }
                continue;
            }
            let mut it = t.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => edges.push((a, b)),
                _ => {
                    return Err(GraphError::Parse {
                        line: lineno,
                        msg: format!("expected `i j`, got `{t}`"),
                    })
                }
            }
        }
        let nodes = nodes.ok_or(GraphError::Parse {
            line: 1,
            msg: "missing `# nodes=<m>` header".into(),
        })?;
        Self::new(nodes, edges)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(m={}, |E|={})", self.node_count, self.edges.len())
    }
}
