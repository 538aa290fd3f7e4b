//! Technology × technology relatedness matrices projected from a binary
//! agents × technologies matrix, and their spanning-tree backbones.

mod export;
mod projections;
mod tree;

pub use export::{export_matrix, export_tree, import_adjacency, import_edge_list, NetworkFormat};
pub use projections::{cooccurrence, proximity, tau, taxonomy, TauResult};
pub use tree::{max_spanning_forest, spanning_tree, SpanningTree, TreeEdge, TreeMode};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{BipartiteMatrix, MatrixError};

/// Above this many technologies, projections that are naturally sparse
/// (co-occurrence, proximity, taxonomy) are stored as CSR.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Error)]
pub enum RelatednessError {
    #[error("input matrix must be binary")]
    NotBinary,
    #[error("agent {0:?} has zero diversification")]
    ZeroDegree(String),
    #[error("matrix has no technologies")]
    EmptyMatrix,
    #[error("unsupported network format {0:?}")]
    UnsupportedFormat(String),
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

impl From<std::io::Error> for RelatednessError {
    fn from(e: std::io::Error) -> Self {
        RelatednessError::Parse(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelatednessKind {
    Cooccurrence,
    Tau,
    Proximity,
    Taxonomy,
}

impl RelatednessKind {
    pub const ALL: [RelatednessKind; 4] = [
        RelatednessKind::Cooccurrence,
        RelatednessKind::Tau,
        RelatednessKind::Proximity,
        RelatednessKind::Taxonomy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelatednessKind::Cooccurrence => "cooccurrence",
            RelatednessKind::Tau => "tau",
            RelatednessKind::Proximity => "proximity",
            RelatednessKind::Taxonomy => "taxonomy",
        }
    }
}

impl fmt::Display for RelatednessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelatednessKind {
    type Err = RelatednessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelatednessKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| RelatednessError::Parse(format!("unknown relatedness kind {s:?}")))
    }
}

/// Which rows the projected matrix was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Firm,
    Country,
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Firm => "firm",
            Aggregation::Country => "country",
        }
    }
}

impl FromStr for Aggregation {
    type Err = RelatednessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "firm" => Ok(Aggregation::Firm),
            "country" => Ok(Aggregation::Country),
            _ => Err(RelatednessError::Parse(format!("unknown aggregation {s:?}"))),
        }
    }
}

/// Ubiquity of each technology and diversification of each agent, both
/// counted on a binary matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeVectors {
    pub ubiquity: Vec<usize>,
    pub diversification: Vec<usize>,
}

impl DegreeVectors {
    pub fn from_binary(m: &BipartiteMatrix) -> Result<Self, RelatednessError> {
        if !m.is_binary() {
            return Err(RelatednessError::NotBinary);
        }
        let mut ubiquity = vec![0; m.n_cols()];
        let mut diversification = vec![0; m.n_rows()];
        for r in 0..m.n_rows() {
            let cols = m.row_cols(r);
            diversification[r] = cols.len();
            for &c in cols {
                ubiquity[c] += 1;
            }
        }
        Ok(DegreeVectors {
            ubiquity,
            diversification,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Sparse {
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    },
}

/// Symmetric T × T matrix over an ordered list of technology codes.
#[derive(Debug, Clone, PartialEq)]
pub struct RelatednessMatrix {
    tech_ids: Vec<String>,
    kind: RelatednessKind,
    source: Aggregation,
    storage: Storage,
}

impl RelatednessMatrix {
    pub fn from_dense(
        tech_ids: Vec<String>,
        kind: RelatednessKind,
        source: Aggregation,
        data: Vec<f64>,
    ) -> Self {
        assert_eq!(data.len(), tech_ids.len() * tech_ids.len(), "dense data must be T×T");
        RelatednessMatrix {
            tech_ids,
            kind,
            source,
            storage: Storage::Dense(data),
        }
    }

    /// Build from per-row nonzeros (column-increasing), choosing dense or
    /// sparse storage by size.
    pub(crate) fn from_rows(
        tech_ids: Vec<String>,
        kind: RelatednessKind,
        source: Aggregation,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Self {
        let n = tech_ids.len();
        let storage = if n <= DENSE_LIMIT {
            let mut data = vec![0.0; n * n];
            for (i, row) in rows.into_iter().enumerate() {
                for (j, v) in row {
                    data[i * n + j] = v;
                }
            }
            Storage::Dense(data)
        } else {
            let mut row_ptr = Vec::with_capacity(n + 1);
            let mut col_idx = Vec::new();
            let mut values = Vec::new();
            row_ptr.push(0);
            for row in rows {
                for (j, v) in row {
                    col_idx.push(j);
                    values.push(v);
                }
                row_ptr.push(col_idx.len());
            }
            Storage::Sparse {
                row_ptr,
                col_idx,
                values,
            }
        };
        RelatednessMatrix {
            tech_ids,
            kind,
            source,
            storage,
        }
    }

    pub fn n(&self) -> usize {
        self.tech_ids.len()
    }

    pub fn tech_ids(&self) -> &[String] {
        &self.tech_ids
    }

    pub fn kind(&self) -> RelatednessKind {
        self.kind
    }

    pub fn source(&self) -> Aggregation {
        self.source
    }

    pub fn with_source(mut self, source: Aggregation) -> Self {
        self.source = source;
        self
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d[i * self.n() + j],
            Storage::Sparse {
                row_ptr,
                col_idx,
                values,
            } => {
                let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
                cols.binary_search(&j)
                    .map_or(0.0, |k| values[row_ptr[i] + k])
            }
        }
    }

    /// Nonzero entries of row `i`, column-increasing.
    pub fn row_nonzeros(&self, i: usize) -> Vec<(usize, f64)> {
        match &self.storage {
            Storage::Dense(d) => {
                let n = self.n();
                d[i * n..(i + 1) * n]
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j, *v))
                    .collect()
            }
            Storage::Sparse {
                row_ptr,
                col_idx,
                values,
            } => (row_ptr[i]..row_ptr[i + 1])
                .map(|k| (col_idx[k], values[k]))
                .collect(),
        }
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Sparse { .. } => {
                let n = self.n();
                let mut out = vec![0.0; n * n];
                for i in 0..n {
                    for (j, v) in self.row_nonzeros(i) {
                        out[i * n + j] = v;
                    }
                }
                out
            }
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        self.to_dense().chunks(n.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Largest |R[i][j] − R[j][i]|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n() {
            for (j, v) in self.row_nonzeros(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Reorder onto `codes`, which must be a permutation of this matrix's
    /// technologies.
    pub fn aligned_to(&self, codes: &[String]) -> Result<RelatednessMatrix, RelatednessError> {
        if codes == self.tech_ids.as_slice() {
            return Ok(self.clone());
        }
        if codes.len() != self.n() {
            return Err(RelatednessError::Inconsistent(format!(
                "relatedness has {} technologies, target has {}",
                self.n(),
                codes.len()
            )));
        }
        let index: std::collections::HashMap<&str, usize> =
            self.tech_ids.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
        let perm = codes
            .iter()
            .map(|c| {
                index.get(c.as_str()).copied().ok_or_else(|| {
                    RelatednessError::Inconsistent(format!("technology {c:?} missing from relatedness"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut inv = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let rows = perm
            .iter()
            .map(|&old| {
                let mut row: Vec<(usize, f64)> =
                    self.row_nonzeros(old).into_iter().map(|(j, v)| (inv[j], v)).collect();
                row.sort_unstable_by_key(|(j, _)| *j);
                row
            })
            .collect();
        Ok(RelatednessMatrix::from_rows(codes.to_vec(), self.kind, self.source, rows))
    }
}
