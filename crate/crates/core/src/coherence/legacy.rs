use std::collections::HashMap;

use super::CoherenceError;
use crate::matrix::BipartiteMatrix;
use crate::relatedness::{max_spanning_forest, RelatednessMatrix};

/// Per-firm patent shares over technologies, from the weighted
/// (pre-binarization) matrix, normalized to sum to 1 per firm.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioWeights {
    pub firm_ids: Vec<String>,
    pub tech_ids: Vec<String>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl PortfolioWeights {
    pub fn from_matrix(weighted: &BipartiteMatrix) -> Self {
        let rows = (0..weighted.n_rows())
            .map(|f| {
                let total: f64 = weighted.row_values(f).iter().sum();
                weighted.row(f).map(|(t, v)| (t, v / total)).collect()
            })
            .collect();
        PortfolioWeights {
            firm_ids: weighted.row_ids().to_vec(),
            tech_ids: weighted.col_ids().to_vec(),
            rows,
        }
    }

    pub fn row(&self, f: usize) -> &[(usize, f64)] {
        &self.rows[f]
    }

    pub fn share(&self, f: usize, t: usize) -> f64 {
        let row = &self.rows[f];
        row.binary_search_by_key(&t, |(c, _)| *c)
            .map_or(0.0, |k| row[k].1)
    }

    /// One portfolio per row of `binary`: its owned technologies with the
    /// matching shares (0 where the weighted matrix has no entry).
    pub fn portfolios(&self, binary: &BipartiteMatrix) -> Result<Vec<FirmPortfolio>, CoherenceError> {
        let row_of: HashMap<&str, usize> =
            self.firm_ids.iter().enumerate().map(|(i, f)| (f.as_str(), i)).collect();
        let col_of: HashMap<&str, usize> =
            self.tech_ids.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
        let col_map: Vec<Option<usize>> =
            binary.col_ids().iter().map(|c| col_of.get(c.as_str()).copied()).collect();
        (0..binary.n_rows())
            .map(|f| {
                let firm_id = &binary.row_ids()[f];
                let wf = *row_of.get(firm_id.as_str()).ok_or_else(|| {
                    CoherenceError::DimensionMismatch(format!("no weights for firm {firm_id:?}"))
                })?;
                let techs = binary.row_cols(f).to_vec();
                let shares = techs
                    .iter()
                    .map(|&t| col_map[t].map_or(0.0, |wt| self.share(wf, wt)))
                    .collect();
                Ok(FirmPortfolio {
                    firm_id: firm_id.clone(),
                    techs,
                    shares,
                })
            })
            .collect()
    }
}

/// A firm's owned technologies with their patent shares.
#[derive(Debug, Clone, PartialEq)]
pub struct FirmPortfolio {
    pub firm_id: String,
    pub techs: Vec<usize>,
    pub shares: Vec<f64>,
}

impl FirmPortfolio {
    /// Equal shares over `techs`.
    pub fn uniform(firm_id: impl Into<String>, techs: Vec<usize>) -> Self {
        let p = 1.0 / techs.len().max(1) as f64;
        let shares = vec![p; techs.len()];
        FirmPortfolio {
            firm_id: firm_id.into(),
            techs,
            shares,
        }
    }

    fn require_pair(&self) -> Result<(), CoherenceError> {
        if self.techs.len() < 2 {
            Err(CoherenceError::SingletonPortfolio(self.firm_id.clone()))
        } else {
            Ok(())
        }
    }
}

fn weighted_mean(
    firm: &FirmPortfolio,
    terms: impl Iterator<Item = (f64, f64)>,
) -> Result<f64, CoherenceError> {
    let (num, den) = terms.fold((0.0, 0.0), |(n, d), (v, p)| (n + v * p, d + p));
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(CoherenceError::ZeroShares(firm.firm_id.clone()))
    }
}

/// Weighted average relatedness of each owned technology to all the others:
/// WAR[t] = Σ_{t′≠t} τ[t][t′]·p[t′] / Σ_{t′≠t} p[t′].
pub fn war(tau: &RelatednessMatrix, firm: &FirmPortfolio) -> Result<Vec<f64>, CoherenceError> {
    firm.require_pair()?;
    (0..firm.techs.len())
        .map(|i| {
            let t = firm.techs[i];
            weighted_mean(
                firm,
                firm.techs
                    .iter()
                    .zip(&firm.shares)
                    .enumerate()
                    .filter(|(k, _)| *k != i)
                    .map(|(_, (&t2, &p))| (tau.get(t, t2), p)),
            )
        })
        .collect()
}

/// Like [`war`], restricted to neighbours in the maximum spanning tree of
/// the firm's τ submatrix.
pub fn warn(tau: &RelatednessMatrix, firm: &FirmPortfolio) -> Result<Vec<f64>, CoherenceError> {
    firm.require_pair()?;
    let labels: Vec<String> = firm.techs.iter().map(|&t| tau.tech_ids()[t].clone()).collect();
    let tree = max_spanning_forest(&labels, |a, b| tau.get(firm.techs[a], firm.techs[b]));
    let mut adj = vec![Vec::new(); firm.techs.len()];
    for e in &tree {
        adj[e.a].push(e.b);
        adj[e.b].push(e.a);
    }
    adj.iter_mut().for_each(|n| n.sort_unstable());
    (0..firm.techs.len())
        .map(|i| {
            let t = firm.techs[i];
            weighted_mean(
                firm,
                adj[i]
                    .iter()
                    .map(|&k| (tau.get(t, firm.techs[k]), firm.shares[k])),
            )
        })
        .collect()
}

/// Share-weighted mean of WAR over the firm's technologies.
pub fn coh(war: &[f64], firm: &FirmPortfolio) -> Result<f64, CoherenceError> {
    firm.require_pair()?;
    if war.len() != firm.techs.len() {
        return Err(CoherenceError::DimensionMismatch(format!(
            "{} WAR values for {} technologies",
            war.len(),
            firm.techs.len()
        )));
    }
    weighted_mean(firm, war.iter().copied().zip(firm.shares.iter().copied()))
}
