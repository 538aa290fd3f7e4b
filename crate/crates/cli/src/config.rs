//! Run configuration: a TOML file overridden field by field by flags.

use std::path::{Path, PathBuf};

use coherence_kit::econometrics::CovarianceType;
use coherence_kit::ingest::ColumnMapping;
use coherence_kit::relatedness::{Aggregation, NetworkFormat, RelatednessKind};
use coherence_kit::synth::GeneratorConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KindChoice {
    Cooccurrence,
    Tau,
    Proximity,
    #[default]
    Taxonomy,
    All,
}

impl KindChoice {
    pub fn kinds(self) -> Vec<RelatednessKind> {
        match self {
            KindChoice::Cooccurrence => vec![RelatednessKind::Cooccurrence],
            KindChoice::Tau => vec![RelatednessKind::Tau],
            KindChoice::Proximity => vec![RelatednessKind::Proximity],
            KindChoice::Taxonomy => vec![RelatednessKind::Taxonomy],
            KindChoice::All => RelatednessKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FormatChoice {
    #[default]
    EdgeList,
    Adjacency,
    Graphml,
}

impl FormatChoice {
    pub fn format(self) -> NetworkFormat {
        match self {
            FormatChoice::EdgeList => NetworkFormat::EdgeList,
            FormatChoice::Adjacency => NetworkFormat::Adjacency,
            FormatChoice::Graphml => NetworkFormat::GraphMl,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            FormatChoice::EdgeList | FormatChoice::Adjacency => "csv",
            FormatChoice::Graphml => "graphml",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Patent-family table (CSV/TSV, optionally gzipped).
    pub families: Option<PathBuf>,
    /// Firm financials table.
    pub financials: Option<PathBuf>,
    /// Triplet matrix written by `ingest`, used instead of `families`.
    pub matrix: Option<PathBuf>,
    /// Adjacency CSV of a given relatedness matrix, used instead of
    /// estimating B.
    pub relatedness: Option<PathBuf>,
    pub schema: ColumnMapping,
    /// Defaults to the latest year present in the families.
    pub year: Option<i32>,
    pub level: Option<u8>,
    pub triadic_only: bool,
    pub threshold: f64,
    pub aggregation: Aggregation,
    pub kind: KindChoice,
    pub format: FormatChoice,
    pub tree: bool,
    pub legacy: bool,
    pub covariance: CovarianceType,
    /// Indices into the four standard regression specifications.
    pub specs: Vec<usize>,
    pub bins: usize,
    pub quantiles: Vec<f64>,
    pub cells: usize,
    pub min_count: usize,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub synth: GeneratorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            families: None,
            financials: None,
            matrix: None,
            relatedness: None,
            schema: ColumnMapping::default(),
            year: None,
            level: None,
            triadic_only: false,
            threshold: 0.0,
            aggregation: Aggregation::Firm,
            kind: KindChoice::default(),
            format: FormatChoice::default(),
            tree: false,
            legacy: false,
            covariance: CovarianceType::Classical,
            specs: vec![0, 1, 2, 3],
            bins: 10,
            quantiles: vec![0.1, 0.25, 0.5, 0.75, 0.9],
            cells: 10,
            min_count: 5,
            seed: None,
            out: PathBuf::from("out"),
            synth: GeneratorConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if let Some(l) = self.level {
            if !(1..=4).contains(&l) {
                return usage(format!("level must be 1..=4, got {l}"));
            }
        }
        if !(self.threshold >= 0.0) {
            return usage(format!("threshold must be nonnegative, got {}", self.threshold));
        }
        if let Some(s) = self.specs.iter().find(|&&s| s > 3) {
            return usage(format!("regression spec {s} does not exist (0..=3)"));
        }
        if self.bins < 2 {
            return usage("bins must be at least 2".into());
        }
        if self.cells == 0 {
            return usage("cells must be at least 1".into());
        }
        Ok(())
    }
}
