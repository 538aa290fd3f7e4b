//! Sparse agent × technology matrices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("duplicate {axis} id {id:?}")]
    DuplicateId { axis: &'static str, id: String },
    #[error("entry ({row}, {col}) out of bounds")]
    OutOfBounds { row: usize, col: usize },
    #[error("entry ({row}, {col}) has invalid value {value}")]
    InvalidValue { row: usize, col: usize, value: f64 },
    #[error("row {0:?} has no nonzero entry")]
    EmptyRow(String),
    #[error("column {0:?} has no nonzero entry")]
    EmptyColumn(String),
    #[error("matrix is not binary")]
    NotBinary,
}

/// Sparse nonnegative agents × technologies matrix in CSR layout.
///
/// Rows and columns carry string identifiers; within each row the column
/// indices are strictly increasing. Construction rejects all-zero rows and
/// columns so that ubiquities and diversifications are strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteMatrix {
    row_ids: Vec<String>,
    col_ids: Vec<String>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    binary: bool,
}

impl BipartiteMatrix {
    /// Build from `(row, col, value)` triplets. Duplicate coordinates are
    /// summed; explicit zeros are dropped.
    pub fn from_triplets(
        row_ids: Vec<String>,
        col_ids: Vec<String>,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, MatrixError> {
        check_unique("row", &row_ids)?;
        check_unique("column", &col_ids)?;
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); row_ids.len()];
        for (r, c, v) in triplets {
            if r >= row_ids.len() || c >= col_ids.len() {
                return Err(MatrixError::OutOfBounds { row: r, col: c });
            }
            if !v.is_finite() || v < 0.0 {
                return Err(MatrixError::InvalidValue { row: r, col: c, value: v });
            }
            *rows[r].entry(c).or_insert(0.0) += v;
        }
        let mut row_ptr = Vec::with_capacity(row_ids.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut col_seen = vec![false; col_ids.len()];
        row_ptr.push(0);
        for (r, row) in rows.into_iter().enumerate() {
            for (c, v) in row {
                if v > 0.0 {
                    col_idx.push(c);
                    values.push(v);
                    col_seen[c] = true;
                }
            }
            if col_idx.len() == *row_ptr.last().unwrap() {
                return Err(MatrixError::EmptyRow(row_ids[r].clone()));
            }
            row_ptr.push(col_idx.len());
        }
        if let Some(c) = col_seen.iter().position(|s| !s) {
            return Err(MatrixError::EmptyColumn(col_ids[c].clone()));
        }
        let binary = values.iter().all(|&v| v == 1.0);
        Ok(BipartiteMatrix {
            row_ids,
            col_ids,
            row_ptr,
            col_idx,
            values,
            binary,
        })
    }

    /// Build from a dense 0/1 (or weighted) matrix; rows/cols get ids
    /// `f0, f1, …` and `t0, t1, …` unless given.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let row_ids = (0..rows.len()).map(|i| format!("f{i}")).collect();
        let col_ids = (0..n_cols).map(|j| format!("t{j}")).collect();
        Self::from_dense_with_ids(row_ids, col_ids, rows)
    }

    pub fn from_dense_with_ids(
        row_ids: Vec<String>,
        col_ids: Vec<String>,
        rows: &[Vec<f64>],
    ) -> Result<Self, MatrixError> {
        let triplets = rows.iter().enumerate().flat_map(|(r, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(move |(c, v)| (r, c, *v))
        });
        Self::from_triplets(row_ids, col_ids, triplets)
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_ids.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[String] {
        &self.col_ids
    }

    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn density(&self) -> f64 {
        self.nnz() as f64 / (self.n_rows() as f64 * self.n_cols() as f64)
    }

    /// Column indices of the nonzero cells of row `r`, increasing.
    pub fn row_cols(&self, r: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    pub fn row_values(&self, r: usize) -> &[f64] {
        &self.values[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row_cols(r).iter().copied().zip(self.row_values(r).iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let cols = self.row_cols(r);
        match cols.binary_search(&c) {
            Ok(k) => self.row_values(r)[k],
            Err(_) => 0.0,
        }
    }

    /// All nonzero cells in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows()).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols()]; self.n_rows()];
        for (r, c, v) in self.triplets() {
            out[r][c] = v;
        }
        out
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.row_values(r).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_cols()];
        for (_, c, v) in self.triplets() {
            sums[c] += v;
        }
        sums
    }

    /// Binarize: a cell becomes 1 iff its value exceeds `threshold`.
    /// Rows and columns left empty are pruned.
    pub fn binarize(&self, threshold: f64) -> Result<Self, MatrixError> {
        let keep: Vec<(usize, usize)> = self
            .triplets()
            .filter(|&(_, _, v)| v > threshold)
            .map(|(r, c, _)| (r, c))
            .collect();
        self.restrict(keep.into_iter().map(|(r, c)| (r, c, 1.0)))
    }

    /// Rebuild from a subset of cells (with replacement values), pruning
    /// rows and columns that end up empty.
    pub(crate) fn restrict(
        &self,
        cells: impl Iterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, MatrixError> {
        let cells: Vec<_> = cells.collect();
        let mut row_used = vec![false; self.n_rows()];
        let mut col_used = vec![false; self.n_cols()];
        for &(r, c, _) in &cells {
            row_used[r] = true;
            col_used[c] = true;
        }
        let row_map = remap(&row_used);
        let col_map = remap(&col_used);
        let row_ids = select(&self.row_ids, &row_used);
        let col_ids = select(&self.col_ids, &col_used);
        BipartiteMatrix::from_triplets(
            row_ids,
            col_ids,
            cells
                .into_iter()
                .map(|(r, c, v)| (row_map[r].unwrap(), col_map[c].unwrap(), v)),
        )
    }

    pub fn require_binary(&self) -> Result<(), MatrixError> {
        if self.binary {
            Ok(())
        } else {
            Err(MatrixError::NotBinary)
        }
    }

    /// Column-compressed view: for each column, the rows holding it
    /// (increasing).
    pub fn column_rows(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.n_cols()];
        for r in 0..self.n_rows() {
            for &c in self.row_cols(r) {
                cols[c].push(r);
            }
        }
        cols
    }

    /// Reorder columns: new column `k` is old column `perm[k]`.
    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let col_ids = perm.iter().map(|&o| self.col_ids[o].clone()).collect();
        let triplets: Vec<_> = self.triplets().map(|(r, c, v)| (r, inv[c], v)).collect();
        BipartiteMatrix::from_triplets(self.row_ids.clone(), col_ids, triplets)
            .expect("permutation preserves validity")
    }
}

fn check_unique(axis: &'static str, ids: &[String]) -> Result<(), MatrixError> {
    let mut seen = std::collections::HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(MatrixError::DuplicateId {
                axis,
                id: id.clone(),
            });
        }
    }
    Ok(())
}

fn remap(used: &[bool]) -> Vec<Option<usize>> {
    let mut next = 0;
    used.iter()
        .map(|&u| {
            u.then(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

fn select(ids: &[String], used: &[bool]) -> Vec<String> {
    ids.iter()
        .zip(used)
        .filter(|(_, u)| **u)
        .map(|(id, _)| id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_roundtrip_and_sums() {
        let m = BipartiteMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(m.is_binary());
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.row_sums(), vec![2.0, 1.0]);
        assert_eq!(m.col_sums(), vec![2.0, 1.0]);
        assert_eq!(m.to_dense(), vec![vec![1.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(m.column_rows(), vec![vec![0, 1], vec![0]]);
    }

    #[test]
    fn rejects_empty_rows_and_columns() {
        assert!(matches!(
            BipartiteMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 0.0]]),
            Err(MatrixError::EmptyRow(_))
        ));
        assert!(matches!(
            BipartiteMatrix::from_dense(&[vec![1.0, 0.0]]),
            Err(MatrixError::EmptyColumn(_))
        ));
    }

    #[test]
    fn rejects_duplicate_ids() {
        let r = BipartiteMatrix::from_triplets(
            vec!["a".into(), "a".into()],
            vec!["t".into()],
            [(0, 0, 1.0), (1, 0, 1.0)],
        );
        assert!(matches!(r, Err(MatrixError::DuplicateId { .. })));
    }

    #[test]
    fn binarize_prunes() {
        let m = BipartiteMatrix::from_dense(&[vec![0.75, 0.25], vec![0.5, 0.0]]).unwrap();
        assert!(!m.is_binary());
        let b = m.binarize(0.3).unwrap();
        assert_eq!(b.col_ids(), &["t0".to_string()]);
        assert_eq!(b.n_rows(), 2);
        assert!(b.is_binary());
    }
}
