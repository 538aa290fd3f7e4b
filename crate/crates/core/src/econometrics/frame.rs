use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EconError;
use crate::coherence::CoherenceTable;
use crate::ingest::FirmFinancials;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    Productivity,
    Size,
    Diversification,
    Gamma,
}

impl Variable {
    pub const ALL: [Variable; 4] = [
        Variable::Productivity,
        Variable::Size,
        Variable::Diversification,
        Variable::Gamma,
    ];

    fn index(self) -> usize {
        self as usize
    }

    /// Row label used in regression tables.
    pub fn label(self) -> &'static str {
        match self {
            Variable::Productivity => "Productivity",
            Variable::Size => "Size",
            Variable::Diversification => "Diversification",
            Variable::Gamma => "Coherent Div.",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variable::Productivity => "productivity",
            Variable::Size => "size",
            Variable::Diversification => "diversification",
            Variable::Gamma => "gamma",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = EconError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variable::ALL
            .into_iter()
            .find(|v| v.name() == s.to_ascii_lowercase())
            .ok_or_else(|| EconError::InvalidArgument(format!("unknown variable {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transform {
    pub log10: bool,
    pub zscore: bool,
}

impl Transform {
    pub const NONE: Transform = Transform {
        log10: false,
        zscore: false,
    };
    pub const LOG_Z: Transform = Transform {
        log10: true,
        zscore: true,
    };
}

/// Per-variable transforms, indexed by [`Variable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transforms(pub [Transform; 4]);

impl Default for Transforms {
    fn default() -> Self {
        Transforms([Transform::LOG_Z; 4])
    }
}

impl Transforms {
    pub fn identity() -> Self {
        Transforms([Transform::NONE; 4])
    }

    pub fn get(&self, v: Variable) -> Transform {
        self.0[v.index()]
    }

    pub fn set(mut self, v: Variable, t: Transform) -> Self {
        self.0[v.index()] = t;
        self
    }
}

/// Joined per-firm observations, transformed for analysis. Raw values are
/// kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisFrame {
    pub firm_ids: Vec<String>,
    pub country: Vec<String>,
    columns: [Vec<f64>; 4],
    raw: [Vec<f64>; 4],
}

impl AnalysisFrame {
    /// Build directly from raw columns; all four must have equal length.
    pub fn from_columns(
        firm_ids: Vec<String>,
        raw: [Vec<f64>; 4],
        transforms: &Transforms,
    ) -> Result<Self, EconError> {
        let n = firm_ids.len();
        if raw.iter().any(|c| c.len() != n) {
            return Err(EconError::InvalidArgument("column lengths differ".into()));
        }
        let mut columns: [Vec<f64>; 4] = Default::default();
        for v in Variable::ALL {
            columns[v.index()] = apply(&raw[v.index()], transforms.get(v), v)?;
        }
        Ok(AnalysisFrame {
            country: vec![String::new(); n],
            firm_ids,
            columns,
            raw,
        })
    }

    pub fn len(&self) -> usize {
        self.firm_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.firm_ids.is_empty()
    }

    pub fn column(&self, v: Variable) -> &[f64] {
        &self.columns[v.index()]
    }

    pub fn raw(&self, v: Variable) -> &[f64] {
        &self.raw[v.index()]
    }
}

/// Why rows did not make it into the frame.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub joined: usize,
    /// Firms in the coherence table without financials.
    pub missing_financials: Vec<String>,
    /// Financial records without a coherence row.
    pub missing_coherence: Vec<String>,
    /// Firms dropped for non-positive or non-finite values.
    pub invalid_values: Vec<String>,
}

fn apply(values: &[f64], t: Transform, v: Variable) -> Result<Vec<f64>, EconError> {
    let mut out: Vec<f64> = if t.log10 {
        values.iter().map(|x| x.log10()).collect()
    } else {
        values.to_vec()
    };
    if out.iter().any(|x| !x.is_finite()) {
        return Err(EconError::NonFinite(v.name().into()));
    }
    if t.zscore {
        let n = out.len() as f64;
        let mean = out.iter().sum::<f64>() / n;
        let var = out.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let sd = var.sqrt();
        if !(sd > 0.0) || !sd.is_finite() {
            return Err(EconError::NonFinite(format!("{} (zero variance)", v.name())));
        }
        out.iter_mut().for_each(|x| *x = (*x - mean) / sd);
    }
    Ok(out)
}

/// Inner-join financials with a coherence table on firm id, optionally
/// restricted to one year, then apply `transforms`. Standardization uses
/// the population standard deviation.
pub fn make_frame(
    financials: &[FirmFinancials],
    table: &CoherenceTable,
    transforms: &Transforms,
    year: Option<i32>,
) -> Result<(AnalysisFrame, FrameReport), EconError> {
    let mut by_firm: HashMap<&str, &FirmFinancials> = HashMap::new();
    for fin in financials.iter().filter(|f| year.map_or(true, |y| f.year == y)) {
        by_firm.entry(fin.firm_id.as_str()).or_insert(fin);
    }
    let mut report = FrameReport::default();
    let mut ids = Vec::new();
    let mut country = Vec::new();
    let mut raw: [Vec<f64>; 4] = Default::default();
    let mut matched = std::collections::HashSet::new();
    for row in &table.rows {
        let Some(fin) = by_firm.get(row.firm_id.as_str()) else {
            report.missing_financials.push(row.firm_id.clone());
            continue;
        };
        matched.insert(row.firm_id.as_str());
        let values = [
            fin.labor_productivity(),
            fin.total_assets,
            row.diversification as f64,
            row.gamma_total,
        ];
        let log_needed = |v: Variable| transforms.get(v).log10;
        let ok = Variable::ALL.iter().all(|&v| {
            let x = values[v.index()];
            x.is_finite() && (!log_needed(v) || x > 0.0)
        }) && values[0] > 0.0
            && values[1] > 0.0;
        if !ok {
            report.invalid_values.push(row.firm_id.clone());
            continue;
        }
        ids.push(row.firm_id.clone());
        country.push(fin.country.clone());
        for (col, x) in raw.iter_mut().zip(values) {
            col.push(x);
        }
    }
    let mut unmatched: Vec<String> = by_firm
        .keys()
        .filter(|k| !matched.contains(*k))
        .map(|k| k.to_string())
        .collect();
    unmatched.sort();
    report.missing_coherence = unmatched;
    if ids.is_empty() {
        return Err(EconError::EmptyJoin);
    }
    report.joined = ids.len();
    let mut frame = AnalysisFrame::from_columns(ids, raw, transforms)?;
    frame.country = country;
    Ok((frame, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_then_standardize() {
        let ids = vec!["a".into(), "b".into(), "c".into()];
        let col = vec![10.0, 100.0, 1000.0];
        let f = AnalysisFrame::from_columns(
            ids,
            [col.clone(), col.clone(), col.clone(), col],
            &Transforms::default(),
        )
        .unwrap();
        // logs (1,2,3): mean 2, population sd sqrt(2/3)
        let expect = [-1.224744871391589, 0.0, 1.224744871391589];
        for (a, b) in f.column(Variable::Gamma).iter().zip(expect) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn zero_variance_is_non_finite() {
        let ids = vec!["a".into(), "b".into()];
        let r = AnalysisFrame::from_columns(
            ids,
            [vec![1.0, 2.0], vec![3.0, 3.0], vec![1.0, 2.0], vec![1.0, 2.0]],
            &Transforms::default(),
        );
        assert!(matches!(r, Err(EconError::NonFinite(_))));
    }

    #[test]
    fn variable_names() {
        assert_eq!("Gamma".parse::<Variable>().unwrap(), Variable::Gamma);
        assert!("foo".parse::<Variable>().is_err());
    }
}
