//! Per-round trace rows and their CSV form.
//!
//! A trace file starts with `#` comment lines: `# config: key = value` for
//! every resolved setting, `# config_hash = <hex>`, and `# derived: key =
//! value` for computed constants. Then comes a CSV header and one row per
//! round. A run that stops abnormally ends with a `# status = ...` line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::HarnessError;

/// Fixed column order of trace files.
pub const TRACE_COLUMNS: [&str; 11] = [
    "t",
    "prox_grad_P",
    "prox_grad_p",
    "consensus_x",
    "consensus_x_scaled",
    "lambda_grad",
    "lambda_grad_is_surrogate",
    "tracking_residual",
    "subsolver_iters",
    "delta_t",
    "wall_ms",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    /// Gradient mapping of the reformulated primal function at `x_avg`.
    #[serde(rename = "prox_grad_P")]
    pub prox_grad_big_p: f64,
    /// Gradient mapping of the original primal function at `x_avg`.
    pub prox_grad_p: Option<f64>,
    /// `||X_perp||_F / sqrt(m)`
    pub consensus_x: f64,
    /// `(L / sqrt(m)) ||X_perp||_F`
    pub consensus_x_scaled: f64,
    pub lambda_grad: f64,
    pub lambda_grad_is_surrogate: bool,
    pub tracking_residual: f64,
    pub subsolver_iters: usize,
    pub delta_t: f64,
    pub wall_ms: f64,
}

impl TraceRow {
    /// Row marking divergence at round `t`: every metric is NaN.
    pub fn diverged(t: usize, wall_ms: f64) -> Self {
        Self {
            t,
            prox_grad_big_p: f64::NAN,
            prox_grad_p: Some(f64::NAN),
            consensus_x: f64::NAN,
            consensus_x_scaled: f64::NAN,
            lambda_grad: f64::NAN,
            lambda_grad_is_surrogate: false,
            tracking_residual: f64::NAN,
            subsolver_iters: 0,
            delta_t: f64::NAN,
            wall_ms,
        }
    }

    pub fn is_divergence_row(&self) -> bool {
        self.prox_grad_big_p.is_nan()
    }

    /// Original-problem gradient mapping when available, the reformulated
    /// one otherwise.
    pub fn primary_metric(&self) -> f64 {
        self.prox_grad_p.unwrap_or(self.prox_grad_big_p)
    }
}

/// Streaming trace writer with periodic flushes.
pub struct TraceWriter<W: Write> {
    csv: csv::Writer<W>,
    flush_every: usize,
    pending: usize,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(
        mut out: W,
        config: &[(String, String)],
        hash: &str,
        derived: &[(String, String)],
        flush_every: usize,
    ) -> Result<Self, HarnessError> {
        for (k, v) in config {
            writeln!(out, "# config: {k} = {v}")?;
        }
        writeln!(out, "# config_hash = {hash}")?;
        for (k, v) in derived {
            writeln!(out, "# derived: {k} = {v}")?;
        }
        let csv = csv::WriterBuilder::new().has_headers(true).from_writer(out);
        Ok(Self {
            csv,
            flush_every: flush_every.max(1),
            pending: 0,
        })
    }

    pub fn push(&mut self, row: &TraceRow) -> Result<(), HarnessError> {
        self.csv.serialize(row)?;
        self.pending += 1;
        if self.pending >= self.flush_every {
            self.csv.flush()?;
            self.pending = 0;
        }
        Ok(())
    }

    /// Flush and, for abnormal endings, append a status comment.
    pub fn finish(self, status: Option<&str>) -> Result<W, HarnessError> {
        let mut out = self
            .csv
            .into_inner()
            .map_err(|e| HarnessError::Io(e.into_error()))?;
        if let Some(s) = status {
            writeln!(out, "# status = {s}")?;
        }
        out.flush()?;
        Ok(out)
    }
}

/// Parsed trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub config: Vec<(String, String)>,
    pub config_hash: Option<String>,
    pub derived: Vec<(String, String)>,
    pub rows: Vec<TraceRow>,
    pub status: Option<String>,
}

fn split_pair(s: &str) -> Option<(String, String)> {
    let (k, v) = s.split_once(" = ")?;
    Some((k.trim().to_string(), v.trim().to_string()))
}

pub fn read_trace<R: BufRead>(input: R) -> Result<TraceFile, HarnessError> {
    let mut file = TraceFile {
        config: vec![],
        config_hash: None,
        derived: vec![],
        rows: vec![],
        status: None,
    };
    let mut body = String::new();
    for line in input.lines() {
        let line = line?;
        if let Some(c) = line.strip_prefix('#') {
            let c = c.trim();
            if let Some(rest) = c.strip_prefix("config:") {
                file.config.extend(split_pair(rest));
            } else if let Some(rest) = c.strip_prefix("derived:") {
                file.derived.extend(split_pair(rest));
            } else if let Some((k, v)) = split_pair(c) {
                match k.as_str() {
                    "config_hash" => file.config_hash = Some(v),
                    "status" => file.status = Some(v),
                    _ => {}
                }
            }
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    for row in rdr.deserialize() {
        file.rows.push(row?);
    }
    Ok(file)
}
