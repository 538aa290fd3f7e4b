//! End-to-end runs: family records and financials in, coherence table and
//! productivity regressions out.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coherence::{CoherenceError, CoherenceOptions, CoherenceTable, PortfolioWeights};
use crate::econometrics::{
    make_frame, table_specs, AnalysisFrame, CovarianceType, EconError, FrameReport,
    RegressionResult, Transforms,
};
use crate::ingest::{
    aggregate_rows, build_matrix, truncate_codes, BuildOptions, FirmFinancials, IngestError,
    PatentFamilyRecord,
};
use crate::matrix::BipartiteMatrix;
use crate::relatedness::{
    cooccurrence, tau, taxonomy, Aggregation, DegreeVectors, RelatednessError, RelatednessMatrix,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Relatedness(#[from] RelatednessError),
    #[error(transparent)]
    Coherence(#[from] CoherenceError),
    #[error(transparent)]
    Econometrics(#[from] EconError),
}

impl PipelineError {
    /// Numeric failures (rank deficiency, non-finite values) as opposed to
    /// problems with the input data.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            PipelineError::Econometrics(EconError::RankDeficient | EconError::NonFinite(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub build: BuildOptions,
    /// IPC depth to truncate codes to before building; `None` keeps them.
    pub level: Option<u8>,
    /// Agents over which the taxonomy matrix is estimated.
    pub aggregation: Aggregation,
    pub transforms: Transforms,
    pub covariance: CovarianceType,
    /// Also compute WAR/WARN/COH from τ.
    pub legacy: bool,
}

impl PipelineOptions {
    pub fn new(year: i32) -> Self {
        PipelineOptions {
            build: BuildOptions::new(year),
            level: None,
            aggregation: Aggregation::Firm,
            transforms: Transforms::default(),
            covariance: CovarianceType::Classical,
            legacy: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub weighted: BipartiteMatrix,
    pub binary: BipartiteMatrix,
    pub taxonomy: RelatednessMatrix,
    pub table: CoherenceTable,
    pub frame: AnalysisFrame,
    pub frame_report: FrameReport,
    /// One result per entry of [`table_specs`]; a specification can fail
    /// on its own (e.g. Γ collinear with diversification) without sinking
    /// the others.
    pub regressions: Vec<Result<RegressionResult, EconError>>,
}

/// firm id → country, first record per firm.
pub fn country_map(financials: &[FirmFinancials]) -> HashMap<String, String> {
    let mut map = HashMap::new();
    for f in financials {
        map.entry(f.firm_id.clone()).or_insert_with(|| f.country.clone());
    }
    map
}

/// Weighted and binary firm matrices for the selected year.
pub fn build_matrices(
    records: &[PatentFamilyRecord],
    opts: &PipelineOptions,
) -> Result<(BipartiteMatrix, BipartiteMatrix), PipelineError> {
    let truncated;
    let records = match opts.level {
        Some(level) => {
            truncated = truncate_codes(records, level)?;
            &truncated[..]
        }
        None => records,
    };
    let weighted = build_matrix(
        records,
        &BuildOptions {
            binarize: false,
            ..opts.build.clone()
        },
    )?;
    let binary = if opts.build.binarize {
        weighted
            .binarize(opts.build.threshold)
            .map_err(|_| IngestError::AllPruned {
                threshold: opts.build.threshold,
            })?
    } else {
        weighted.clone()
    };
    Ok((weighted, binary))
}

/// Taxonomy matrix of `binary`, estimated either over its own rows or over
/// country aggregates of them.
pub fn taxonomy_for(
    binary: &BipartiteMatrix,
    aggregation: Aggregation,
    countries: &HashMap<String, String>,
) -> Result<RelatednessMatrix, PipelineError> {
    let agents = match aggregation {
        Aggregation::Firm => return Ok(taxonomy(binary, &DegreeVectors::from_binary(binary)?)?),
        Aggregation::Country => aggregate_rows(binary, countries, Some(0.0))?,
    };
    let b = taxonomy(&agents, &DegreeVectors::from_binary(&agents)?)?;
    Ok(b.with_source(Aggregation::Country).aligned_to(binary.col_ids())?)
}

/// Build, project, score and regress. Firms without financials still get a
/// coherence row; only the regression frame drops them.
pub fn run(
    records: &[PatentFamilyRecord],
    financials: &[FirmFinancials],
    opts: &PipelineOptions,
) -> Result<PipelineOutput, PipelineError> {
    let (weighted, binary) = build_matrices(records, opts)?;
    let b = taxonomy_for(&binary, opts.aggregation, &country_map(financials))?;
    let legacy = if opts.legacy {
        let degrees = DegreeVectors::from_binary(&binary)?;
        let j = cooccurrence(&binary)?;
        let t = tau(&j, &degrees, binary.n_rows())?.matrix;
        Some((t, PortfolioWeights::from_matrix(&weighted)))
    } else {
        None
    };
    let table = CoherenceTable::compute(
        &binary,
        &b,
        legacy.as_ref().map(|(t, w)| (t, w)),
        CoherenceOptions::default(),
    )?;
    let (frame, frame_report) =
        make_frame(financials, &table, &opts.transforms, Some(opts.build.year))?;
    let regressions = table_specs()
        .iter()
        .map(|s| s.run(&frame, opts.covariance))
        .collect();
    Ok(PipelineOutput {
        weighted,
        binary,
        taxonomy: b,
        table,
        frame,
        frame_report,
        regressions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, GeneratorConfig};

    #[test]
    fn small_synthetic_run() {
        let c = GeneratorConfig {
            n_firms: 300,
            n_products: 15,
            ..GeneratorConfig::default()
        };
        let data = generate(&c).unwrap();
        let out = run(&data.records, &data.financials, &PipelineOptions::new(c.year)).unwrap();
        assert_eq!(out.table.rows.len(), 300);
        assert_eq!(out.frame.len(), 300);
        assert_eq!(out.regressions.len(), 4);
        assert!(out.table.rows.iter().all(|r| r.gamma_total > 0.0 && r.gamma_total <= 1.0 + 1e-12));

        let mut opts = PipelineOptions::new(c.year);
        opts.aggregation = Aggregation::Country;
        let country = run(&data.records, &data.financials, &opts).unwrap();
        assert_eq!(country.table.source_aggregation, Aggregation::Country);
        assert_eq!(country.taxonomy.tech_ids(), out.binary.col_ids());
    }
}
