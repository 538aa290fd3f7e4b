use std::fmt::Write;

use super::{ols, AnalysisFrame, CovarianceType, EconError, RegressionResult, Variable};

/// One column of the productivity regression table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub label: &'static str,
    pub regressors: Vec<Variable>,
}

/// The four standard specifications: all three regressors, size with Γ,
/// Γ alone, size with diversification.
pub fn table_specs() -> Vec<TableSpec> {
    use Variable::*;
    vec![
        TableSpec { label: "(0)", regressors: vec![Size, Diversification, Gamma] },
        TableSpec { label: "(1)", regressors: vec![Size, Gamma] },
        TableSpec { label: "(2)", regressors: vec![Gamma] },
        TableSpec { label: "(3)", regressors: vec![Size, Diversification] },
    ]
}

impl TableSpec {
    pub fn run(&self, frame: &AnalysisFrame, cov: CovarianceType) -> Result<RegressionResult, EconError> {
        ols(frame, Variable::Productivity, &self.regressors, cov)
    }
}

/// Aligned text table: one column per result, coefficient with stars above
/// the parenthesized standard error, then R² and N rows. Missing results
/// print as `n/a`.
pub fn format_table(columns: &[(&str, Option<&RegressionResult>)]) -> String {
    let labels: Vec<&str> = columns.iter().map(|c| c.0).collect();
    let results: Vec<Option<&RegressionResult>> = columns.iter().map(|c| c.1).collect();
    let mut rows: Vec<String> = Vec::new();
    for r in results.iter().flatten() {
        for t in &r.terms {
            if !rows.contains(&t.name) {
                rows.push(t.name.clone());
            }
        }
    }
    const W0: usize = 18;
    const W: usize = 12;
    let mut out = String::new();
    let _ = write!(out, "{:<W0$}", "VARIABLES");
    for l in labels {
        let _ = write!(out, "{l:>W$}");
    }
    out.push('\n');
    for name in &rows {
        let _ = write!(out, "{name:<W0$}");
        for r in &results {
            let cell = r
                .and_then(|r| r.term(name))
                .map(|t| format!("{:.3}{}", t.coef, t.stars()))
                .unwrap_or_default();
            let _ = write!(out, "{cell:>W$}");
        }
        out.push('\n');
        let _ = write!(out, "{:<W0$}", "");
        for r in &results {
            let cell = r.and_then(|r| r.term(name)).map(|t| format!("({:.3})", t.se)).unwrap_or_default();
            let _ = write!(out, "{cell:>W$}");
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<W0$}", "R^2");
    for r in &results {
        let cell = r.map_or("n/a".to_string(), |r| format!("{:.3}", r.r_squared));
        let _ = write!(out, "{cell:>W$}");
    }
    out.push('\n');
    let _ = write!(out, "{:<W0$}", "N");
    for r in &results {
        let cell = r.map_or("n/a".to_string(), |r| r.n.to_string());
        let _ = write!(out, "{cell:>W$}");
    }
    out.push('\n');
    out.push_str("*** p<0.01, ** p<0.05, * p<0.1\n");
    out
}
