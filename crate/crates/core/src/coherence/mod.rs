//! Intra-firm coherence γ, coherent diversification Γ, and the older
//! τ-based portfolio measures WAR, WARN and COH.
//!
//! γ[f][t] = Σ_t′ B[t][t′]·M[f][t′] is defined for every technology, owned
//! or not. Γ_f is the mean of γ over the technologies firm f owns. With a
//! 0/1 relatedness matrix Γ is the average size of the related blocks in
//! the portfolio; with the taxonomy matrix estimated from data every row of
//! B sums to at most 1, so Γ lies in (0, 1] and reads as the share of
//! relatedness mass a portfolio keeps to itself.

pub mod exact;
mod legacy;
mod table;

pub use legacy::{coh, war, warn, FirmPortfolio, PortfolioWeights};
pub use table::{CoherenceOptions, CoherenceTable, FirmCoherence, SINGLETON_FLAG};

use thiserror::Error;

use crate::matrix::BipartiteMatrix;
use crate::relatedness::RelatednessMatrix;

#[derive(Debug, Error)]
pub enum CoherenceError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("firm {0:?} owns no technology")]
    ZeroDiversification(String),
    #[error("firm {0:?} owns fewer than two technologies")]
    SingletonPortfolio(String),
    #[error("firm {0:?} has zero portfolio share on its technologies")]
    ZeroShares(String),
    #[error("portfolio matrix must be binary")]
    NotBinary,
}

/// Dense firms × technologies γ matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix {
    pub firm_ids: Vec<String>,
    pub tech_ids: Vec<String>,
    data: Vec<f64>,
}

impl GammaMatrix {
    pub fn row(&self, f: usize) -> &[f64] {
        let t = self.tech_ids.len();
        &self.data[f * t..(f + 1) * t]
    }

    pub fn get(&self, f: usize, t: usize) -> f64 {
        self.row(f)[t]
    }

    pub fn n_firms(&self) -> usize {
        self.firm_ids.len()
    }
}

pub(crate) fn check_columns(m: &BipartiteMatrix, b: &RelatednessMatrix) -> Result<(), CoherenceError> {
    if !m.is_binary() {
        return Err(CoherenceError::NotBinary);
    }
    if m.col_ids() != b.tech_ids() {
        return Err(CoherenceError::DimensionMismatch(format!(
            "portfolio matrix has {} technologies, relatedness has {} (or a different order)",
            m.n_cols(),
            b.n()
        )));
    }
    Ok(())
}

/// γ row of one firm: Σ over owned t′ (increasing) of row t′ of B.
pub(crate) fn gamma_row_into(owned: &[usize], b: &RelatednessMatrix, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for &t2 in owned {
        for (t, v) in b.row_nonzeros(t2) {
            out[t] += v;
        }
    }
}

/// Σ_t∈own γ[f][t] / d_f, accumulated in the same order as
/// [`gamma_row_into`] so both routes agree bitwise.
pub(crate) fn firm_gamma_total(owned: &[usize], b: &RelatednessMatrix) -> f64 {
    let mut total = 0.0;
    for &t in owned {
        let mut g = 0.0;
        for &t2 in owned {
            g += b.get(t2, t);
        }
        total += g;
    }
    total / owned.len() as f64
}

/// γ = M·B for a binary M whose columns match B's technologies.
pub fn gamma(m: &BipartiteMatrix, b: &RelatednessMatrix) -> Result<GammaMatrix, CoherenceError> {
    check_columns(m, b)?;
    let t = m.n_cols();
    let mut data = vec![0.0; m.n_rows() * t];
    let fill = |(f, out): (usize, &mut [f64])| gamma_row_into(m.row_cols(f), b, out);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(t.max(1)).enumerate().for_each(fill);
    }
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(t.max(1)).enumerate().for_each(fill);
    Ok(GammaMatrix {
        firm_ids: m.row_ids().to_vec(),
        tech_ids: m.col_ids().to_vec(),
        data,
    })
}

/// Γ_f = Σ_t M[f][t]·γ[f][t] / d_f.
pub fn coherent_diversification(
    m: &BipartiteMatrix,
    gamma: &GammaMatrix,
) -> Result<Vec<f64>, CoherenceError> {
    if !m.is_binary() {
        return Err(CoherenceError::NotBinary);
    }
    if gamma.firm_ids.as_slice() != m.row_ids() || gamma.tech_ids.as_slice() != m.col_ids() {
        return Err(CoherenceError::DimensionMismatch(
            "γ matrix does not match the portfolio matrix".into(),
        ));
    }
    (0..m.n_rows())
        .map(|f| {
            let owned = m.row_cols(f);
            if owned.is_empty() {
                return Err(CoherenceError::ZeroDiversification(m.row_ids()[f].clone()));
            }
            let row = gamma.row(f);
            Ok(owned.iter().map(|&t| row[t]).sum::<f64>() / owned.len() as f64)
        })
        .collect()
}

/// Γ for every firm without materializing γ; bitwise equal to
/// [`coherent_diversification`] applied to [`gamma`].
pub fn coherent_diversification_from(
    m: &BipartiteMatrix,
    b: &RelatednessMatrix,
) -> Result<Vec<f64>, CoherenceError> {
    check_columns(m, b)?;
    let per_firm = |f: usize| {
        let owned = m.row_cols(f);
        if owned.is_empty() {
            Err(CoherenceError::ZeroDiversification(m.row_ids()[f].clone()))
        } else {
            Ok(firm_gamma_total(owned, b))
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..m.n_rows()).into_par_iter().map(per_firm).collect()
    }
    #[cfg(not(feature = "parallel"))]
    (0..m.n_rows()).map(per_firm).collect()
}
