use std::io::Write;

use serde::{Deserialize, Serialize};

use super::legacy::{coh, war, warn, FirmPortfolio, PortfolioWeights};
use super::{check_columns, firm_gamma_total, gamma_row_into, CoherenceError};
use crate::matrix::BipartiteMatrix;
use crate::relatedness::{Aggregation, RelatednessMatrix};

/// Set on rows whose portfolio has a single technology: WAR, WARN and COH
/// are undefined there and left empty.
pub const SINGLETON_FLAG: &str = "singleton";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmCoherence {
    pub firm_id: String,
    pub diversification: usize,
    #[serde(rename = "Gamma")]
    pub gamma_total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_row: Option<Vec<f64>>,
    pub war: Option<Vec<f64>>,
    pub warn: Option<Vec<f64>>,
    pub coh: Option<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoherenceOptions {
    /// Keep the full γ row of every firm.
    pub gamma_rows: bool,
}

/// Per-firm coherence record for one portfolio matrix and one relatedness
/// matrix (possibly estimated at a different aggregation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceTable {
    pub source_aggregation: Aggregation,
    pub tech_ids: Vec<String>,
    pub rows: Vec<FirmCoherence>,
}

impl CoherenceTable {
    /// Compute γ/Γ from `b` and, when `legacy` is given as (τ, weights),
    /// WAR/WARN/COH for every firm with at least two technologies.
    pub fn compute(
        m: &BipartiteMatrix,
        b: &RelatednessMatrix,
        legacy: Option<(&RelatednessMatrix, &PortfolioWeights)>,
        opts: CoherenceOptions,
    ) -> Result<Self, CoherenceError> {
        check_columns(m, b)?;
        let portfolios: Option<Vec<FirmPortfolio>> = match legacy {
            Some((tau, weights)) => {
                if tau.tech_ids() != m.col_ids() {
                    return Err(CoherenceError::DimensionMismatch(
                        "τ matrix does not match portfolio technologies".into(),
                    ));
                }
                Some(weights.portfolios(m)?)
            }
            None => None,
        };
        let tau = legacy.map(|(t, _)| t);
        let row = |f: usize| -> Result<FirmCoherence, CoherenceError> {
            let owned = m.row_cols(f);
            if owned.is_empty() {
                return Err(CoherenceError::ZeroDiversification(m.row_ids()[f].clone()));
            }
            let gamma_total = firm_gamma_total(owned, b);
            let gamma_row = opts.gamma_rows.then(|| {
                let mut out = vec![0.0; m.n_cols()];
                gamma_row_into(owned, b, &mut out);
                out
            });
            let mut flags = Vec::new();
            let (mut war_v, mut warn_v, mut coh_v) = (None, None, None);
            if owned.len() < 2 {
                flags.push(SINGLETON_FLAG.to_string());
            } else if let (Some(tau), Some(ports)) = (tau, portfolios.as_ref()) {
                let p = &ports[f];
                let w = war(tau, p)?;
                coh_v = Some(coh(&w, p)?);
                warn_v = Some(warn(tau, p)?);
                war_v = Some(w);
            }
            Ok(FirmCoherence {
                firm_id: m.row_ids()[f].clone(),
                diversification: owned.len(),
                gamma_total,
                gamma_row,
                war: war_v,
                warn: warn_v,
                coh: coh_v,
                flags,
            })
        };
        #[cfg(feature = "parallel")]
        let rows = {
            use rayon::prelude::*;
            (0..m.n_rows()).into_par_iter().map(row).collect::<Result<Vec<_>, _>>()?
        };
        #[cfg(not(feature = "parallel"))]
        let rows = (0..m.n_rows()).map(row).collect::<Result<Vec<_>, _>>()?;
        Ok(CoherenceTable {
            source_aggregation: b.source(),
            tech_ids: m.col_ids().to_vec(),
            rows,
        })
    }

    pub fn gamma_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gamma_total).collect()
    }

    pub fn get(&self, firm_id: &str) -> Option<&FirmCoherence> {
        self.rows.iter().find(|r| r.firm_id == firm_id)
    }

    /// One line per firm: `firm_id,d_f,Gamma,COH,flags,source_aggregation`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["firm_id", "d_f", "Gamma", "COH", "flags", "source_aggregation"])?;
        for r in &self.rows {
            w.write_record([
                r.firm_id.clone(),
                r.diversification.to_string(),
                r.gamma_total.to_string(),
                r.coh.map(|c| c.to_string()).unwrap_or_default(),
                r.flags.join(";"),
                self.source_aggregation.name().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
