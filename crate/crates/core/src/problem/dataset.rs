//! Sparse labelled datasets, LIBSVM text I/O and agent partitions.

use std::io::{BufRead, Write};

use super::ProblemError;
use crate::rng::SeedStream;

/// Binary-labelled samples with a CSR feature matrix.
///
/// Feature indices are stored 0-based; the LIBSVM text form is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_dim: usize,
    labels: Vec<f64>,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Dataset {
    /// Build from dense rows. Zero entries are dropped from the sparse storage.
    pub fn from_dense(rows: &[Vec<f64>], labels: &[f64]) -> Result<Self, ProblemError> {
        if rows.is_empty() {
            return Err(ProblemError::EmptyDataset);
        }
        if rows.len() != labels.len() {
            return Err(ProblemError::DimensionMismatch {
                expected: rows.len(),
                got: labels.len(),
            });
        }
        let feature_dim = rows[0].len();
        let mut ds = Self {
            feature_dim,
            labels: Vec::with_capacity(rows.len()),
            indptr: vec![0],
            indices: vec![],
            values: vec![],
        };
        for (k, (row, &b)) in rows.iter().zip(labels).enumerate() {
            if row.len() != feature_dim {
                return Err(ProblemError::DimensionMismatch {
                    expected: feature_dim,
                    got: row.len(),
                });
            }
            if b != 1.0 && b != -1.0 {
                return Err(ProblemError::BadLabel {
                    line: k + 1,
                    label: b.to_string(),
                });
            }
            for (idx, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    ds.indices.push(idx);
                    ds.values.push(v);
                }
            }
            ds.indptr.push(ds.indices.len());
            ds.labels.push(b);
        }
        Ok(ds)
    }

    pub fn sample_count(&self) -> usize {
        self.labels.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label(&self, j: usize) -> f64 {
        self.labels[j]
    }

    /// Stored `(indices, values)` of sample `j`.
    pub fn row(&self, j: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.indptr[j], self.indptr[j + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn dot_row(&self, j: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(j);
        idx.iter().zip(val).map(|(&k, v)| v * x[k]).sum()
    }

    /// `out += coef * a_j`
    pub fn add_row_scaled(&self, j: usize, coef: f64, out: &mut [f64]) {
        let (idx, val) = self.row(j);
        for (&k, v) in idx.iter().zip(val) {
            out[k] += coef * v;
        }
    }

    pub fn row_norm_sq(&self, j: usize) -> f64 {
        self.row(j).1.iter().map(|v| v * v).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.sample_count())
            .map(|j| {
                let mut r = vec![0.0; self.feature_dim];
                self.add_row_scaled(j, 1.0, &mut r);
                r
            })
            .collect()
    }
}

/// Reader options for LIBSVM text.
#[derive(Debug, Clone, Copy, Default)]
pub struct LibsvmOptions {
    /// Accept `{0, 1}` labels and map `0 -> -1`.
    pub zero_one_labels: bool,
    /// Fixed feature dimension; defaults to the largest index seen.
    pub feature_dim: Option<usize>,
}

fn parse_label(tok: &str, line: usize, opts: &LibsvmOptions) -> Result<f64, ProblemError> {
    let bad = || ProblemError::BadLabel {
        line,
        label: tok.to_string(),
    };
    let v: f64 = tok.parse().map_err(|_| bad())?;
    if v == 1.0 {
        Ok(1.0)
    } else if v == -1.0 && !opts.zero_one_labels {
        Ok(-1.0)
    } else if v == 0.0 && opts.zero_one_labels {
        Ok(-1.0)
    } else {
        Err(bad())
    }
}

/// Parse `<label> <idx>:<val> ...` lines (indices 1-based, strictly
/// ascending). Blank lines are skipped and `#` starts a trailing comment.
pub fn parse_libsvm<R: BufRead>(input: R, opts: LibsvmOptions) -> Result<Dataset, ProblemError> {
    let mut labels = Vec::new();
    let mut indptr = vec![0];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    let mut max_index = 0usize;
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let label = parse_label(toks.next().unwrap_or_default(), lineno, &opts)?;
        let mut prev = 0usize;
        for tok in toks {
            let (i, v) = tok.split_once(':').ok_or_else(|| ProblemError::Malformed {
                line: lineno,
                msg: format!("expected <index>:<value>, got `{tok}`"),
            })?;
            let idx: usize = i.parse().map_err(|_| ProblemError::Malformed {
                line: lineno,
                msg: format!("bad feature index `{i}`"),
            })?;
            if idx == 0 {
                return Err(ProblemError::Malformed {
                    line: lineno,
                    msg: "feature indices start at 1".into(),
                });
            }
            let val: f64 = v.parse().map_err(|_| ProblemError::Malformed {
                line: lineno,
                msg: format!("bad feature value `{v}`"),
            })?;
            if !val.is_finite() {
                return Err(ProblemError::Malformed {
                    line: lineno,
                    msg: format!("non-finite feature value `{v}`"),
                });
            }
            if idx <= prev {
                return Err(ProblemError::NonAscending {
                    line: lineno,
                    index: idx,
                });
            }
            if let Some(dim) = opts.feature_dim {
                if idx > dim {
                    return Err(ProblemError::IndexOutOfRange {
                        line: lineno,
                        index: idx,
                        dim,
                    });
                }
            }
            prev = idx;
            max_index = max_index.max(idx);
            indices.push(idx - 1);
            values.push(val);
        }
        labels.push(label);
        indptr.push(indices.len());
    }
    if labels.is_empty() {
        return Err(ProblemError::EmptyDataset);
    }
    Ok(Dataset {
        feature_dim: opts.feature_dim.unwrap_or(max_index),
        labels,
        indptr,
        indices,
        values,
    })
}

/// Write LIBSVM text with `+1`/`-1` labels and 1-based indices.
pub fn write_libsvm<W: Write>(ds: &Dataset, mut out: W) -> Result<(), ProblemError> {
    for j in 0..ds.sample_count() {
        write!(out, "{}", if ds.label(j) > 0.0 { "+1" } else { "-1" })?;
        let (idx, val) = ds.row(j);
        for (&k, v) in idx.iter().zip(val) {
            write!(out, " {}:{}", k + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Disjoint cover of the sample indices `0..N` by `m` agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    sets: Vec<Vec<usize>>,
}

impl Partition {
    /// Validate that `sets` is a disjoint cover of `0..samples`.
    pub fn new(sets: Vec<Vec<usize>>, samples: usize) -> Result<Self, ProblemError> {
        let mut seen = vec![false; samples];
        for s in &sets {
            for &j in s {
                if j >= samples || seen[j] {
                    return Err(ProblemError::BadPartition(samples));
                }
                seen[j] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(ProblemError::BadPartition(samples));
        }
        Ok(Self { sets })
    }

    /// A single agent owning `0..samples` in order.
    pub fn single(samples: usize) -> Self {
        Self {
            sets: vec![(0..samples).collect()],
        }
    }

    /// Seeded uniform split: Fisher-Yates shuffle of `0..N`, then contiguous
    /// chunks where the first `N mod m` chunks get one extra element.
    pub fn random(samples: usize, agents: usize, seed: u64) -> Result<Self, ProblemError> {
        if agents == 0 || agents > samples {
            return Err(ProblemError::TooManyAgents { agents, samples });
        }
        let mut idx: Vec<usize> = (0..samples).collect();
        SeedStream::new(seed).shuffle(&mut idx);
        let (q, r) = (samples / agents, samples % agents);
        let mut sets = Vec::with_capacity(agents);
        let mut pos = 0;
        for i in 0..agents {
            let k = q + usize::from(i < r);
            sets.push(idx[pos..pos + k].to_vec());
            pos += k;
        }
        Ok(Self { sets })
    }

    pub fn agents(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, agent: usize) -> &[usize] {
        &self.sets[agent]
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn samples(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    /// `owner[j]` is the agent holding sample `j`.
    pub fn owners(&self) -> Vec<usize> {
        let mut owner = vec![0; self.samples()];
        for (i, s) in self.sets.iter().enumerate() {
            for &j in s {
                owner[j] = i;
            }
        }
        owner
    }

    /// One whitespace-separated line of 0-based sample indices per agent.
    pub fn write<W: Write>(&self, mut out: W) -> Result<(), ProblemError> {
        for s in &self.sets {
            let line: Vec<String> = s.iter().map(usize::to_string).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R, samples: usize) -> Result<Self, ProblemError> {
        let mut sets = Vec::new();
        for (k, line) in input.lines().enumerate() {
            let line = line?;
            let set = line
                .split_whitespace()
                .map(str::parse::<usize>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ProblemError::Malformed {
                    line: k + 1,
                    msg: e.to_string(),
                })?;
            sets.push(set);
        }
        Self::new(sets, samples)
    }
}

/// Split `ds` uniformly at random among `agents`.
pub fn partition_dataset(ds: &Dataset, agents: usize, seed: u64) -> Result<Partition, ProblemError> {
    Partition::random(ds.sample_count(), agents, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Dataset, ProblemError> {
        parse_libsvm(s.as_bytes(), LibsvmOptions::default())
    }

    #[test]
    fn single_line() {
        let ds = parse("+1 1:0.5 3:2\n").unwrap();
        assert_eq!(ds.sample_count(), 1);
        assert_eq!(ds.feature_dim(), 3);
        assert_eq!(ds.label(0), 1.0);
        assert_eq!(ds.to_dense(), vec![vec![0.5, 0.0, 2.0]]);
    }

    #[test]
    fn empty_stream() {
        assert!(matches!(parse(""), Err(ProblemError::EmptyDataset)));
        assert!(matches!(parse("\n\n"), Err(ProblemError::EmptyDataset)));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(
            parse("+1 1:1\n-1 3:1 2:1\n"),
            Err(ProblemError::NonAscending { line: 2, index: 2 })
        ));
        assert!(matches!(
            parse("+1 1:1\n+1 2-1\n"),
            Err(ProblemError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse("2 1:1\n"),
            Err(ProblemError::BadLabel { line: 1, .. })
        ));
        assert!(matches!(
            parse("0 1:1\n"),
            Err(ProblemError::BadLabel { line: 1, .. })
        ));
        assert!(matches!(
            parse("+1 0:1\n"),
            Err(ProblemError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn zero_one_labels_behind_flag() {
        let opts = LibsvmOptions {
            zero_one_labels: true,
            feature_dim: None,
        };
        let ds = parse_libsvm("0 1:1\n1 2:1\n".as_bytes(), opts).unwrap();
        assert_eq!(ds.labels(), &[-1.0, 1.0]);
        assert!(parse_libsvm("-1 1:1\n".as_bytes(), opts).is_err());
    }

    #[test]
    fn dimension_override() {
        let opts = LibsvmOptions {
            zero_one_labels: false,
            feature_dim: Some(5),
        };
        assert_eq!(parse_libsvm("+1 2:1\n".as_bytes(), opts).unwrap().feature_dim(), 5);
        let small = LibsvmOptions {
            feature_dim: Some(1),
            ..opts
        };
        assert!(matches!(
            parse_libsvm("+1 2:1\n".as_bytes(), small),
            Err(ProblemError::IndexOutOfRange { line: 1, index: 2, dim: 1 })
        ));
    }

    #[test]
    fn partition_small_cases() {
        let p = Partition::random(4, 2, 99).unwrap();
        assert_eq!(p.set(0).len(), 2);
        assert_eq!(p.set(1).len(), 2);
        assert!(Partition::new(p.sets().to_vec(), 4).is_ok());

        let p = Partition::random(10, 3, 5).unwrap();
        let mut sizes: Vec<_> = p.sets().iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4]);

        assert!(matches!(
            Partition::random(3, 4, 0),
            Err(ProblemError::TooManyAgents { .. })
        ));
    }

    #[test]
    fn partition_rejects_overlap() {
        assert!(Partition::new(vec![vec![0, 1], vec![1, 2]], 3).is_err());
        assert!(Partition::new(vec![vec![0], vec![2]], 3).is_err());
    }
}
