use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::SyntheticTruth;
use crate::coherence::CoherenceTable;
use crate::econometrics::{midranks, RegressionResult, Variable};

/// Spearman rank correlation with mid-ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (midranks(a), midranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub n_matched: usize,
    /// Spearman(planted mean block size, computed Γ).
    pub spearman_block_gamma: f64,
    pub gamma_coef: Option<f64>,
    pub gamma_t: Option<f64>,
    pub gamma_p: Option<f64>,
    pub gamma_positive_significant: bool,
    pub diversification_alone_coef: Option<f64>,
    pub diversification_alone_p: Option<f64>,
    pub diversification_with_gamma_p: Option<f64>,
    /// Significant positive alone at 5%, not significant once Γ is in.
    pub diversification_loses_significance: Option<bool>,
}

/// Compare the planted structure with what the pipeline recovered.
/// `regression` should include Γ; `diversification_only` is the regression
/// on diversification without Γ, when available.
pub fn evaluate_recovery(
    truth: &SyntheticTruth,
    table: &CoherenceTable,
    regression: &RegressionResult,
    diversification_only: Option<&RegressionResult>,
) -> RecoveryReport {
    let planted: HashMap<&str, f64> = truth
        .firms
        .iter()
        .map(|f| (f.firm_id.as_str(), f.mean_block_size))
        .collect();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for row in &table.rows {
        if let Some(&s) = planted.get(row.firm_id.as_str()) {
            a.push(s);
            b.push(row.gamma_total);
        }
    }
    let g = regression.term(Variable::Gamma.label());
    let d_with = regression.term(Variable::Diversification.label());
    let d_alone = diversification_only.and_then(|r| r.term(Variable::Diversification.label()));
    let loses = match (d_alone, d_with) {
        (Some(alone), Some(with)) => Some(alone.coef > 0.0 && alone.p < 0.05 && with.p > 0.05),
        _ => None,
    };
    RecoveryReport {
        n_matched: a.len(),
        spearman_block_gamma: if a.len() > 1 { spearman(&a, &b) } else { f64::NAN },
        gamma_coef: g.map(|t| t.coef),
        gamma_t: g.map(|t| t.t),
        gamma_p: g.map(|t| t.p),
        gamma_positive_significant: g.is_some_and(|t| t.coef > 0.0 && t.p < 0.01),
        diversification_alone_coef: d_alone.map(|t| t.coef),
        diversification_alone_p: d_alone.map(|t| t.p),
        diversification_with_gamma_p: d_with.map(|t| t.p),
        diversification_loses_significance: loses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 0.0]) + 1.0).abs() < 1e-15);
        // ties: ranks (1.5,1.5,3) vs (1,2,3)
        let r = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]);
        assert!((r - 0.8660254037844386).abs() < 1e-12);
    }
}
