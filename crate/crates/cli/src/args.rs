use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use coherence_kit::econometrics::CovarianceType;
use coherence_kit::relatedness::Aggregation;

use crate::config::{FormatChoice, KindChoice, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "coherence-kit", version, about = "Relatedness networks and coherent diversification of patent portfolios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the firms × technologies matrices and print summary stats.
    Ingest(IngestArgs),
    /// Project the matrix onto technology × technology relatedness.
    Relatedness(RelatednessArgs),
    /// Per-firm γ/Γ (and optionally WAR/WARN/COH) table.
    Coherence(CoherenceArgs),
    /// Coherence table, productivity regressions, binned curves, heat grids.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic corpus with planted product lines.
    Synth(SynthArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Relatedness(_) => "relatedness",
            Command::Coherence(_) => "coherence",
            Command::Analyze(_) => "analyze",
            Command::Synth(_) => "synth",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Ingest(a) => &a.common,
            Command::Relatedness(a) => &a.common,
            Command::Coherence(a) => &a.common,
            Command::Analyze(a) => &a.common,
            Command::Synth(a) => &a.common,
        }
    }

    /// Config file (if any) with this command's flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let common = self.common();
        let mut c = match &common.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        common.apply(&mut c);
        match self {
            Command::Ingest(_) => {}
            Command::Relatedness(a) => {
                set(&mut c.matrix, a.matrix.clone());
                set_value(&mut c.kind, a.kind);
                set_value(&mut c.format, a.format);
                c.tree |= a.tree;
            }
            Command::Coherence(a) => {
                set(&mut c.matrix, a.matrix.clone());
                set(&mut c.relatedness, a.relatedness.clone());
                c.legacy |= a.legacy;
            }
            Command::Analyze(a) => {
                set(&mut c.matrix, a.matrix.clone());
                set(&mut c.relatedness, a.relatedness.clone());
                set_value(&mut c.bins, a.bins);
                set_value(&mut c.cells, a.cells);
                set_value(&mut c.min_count, a.min_count);
                set_value(&mut c.covariance, a.covariance);
                c.legacy |= a.legacy;
            }
            Command::Synth(a) => {
                set_value(&mut c.synth.n_firms, a.firms);
            }
        }
        if let Some(seed) = c.seed {
            c.synth.seed = seed;
        }
        c.validate()?;
        Ok(c)
    }
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

fn set_value<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn parse_aggregation(s: &str) -> Result<Aggregation, String> {
    s.parse().map_err(|e: coherence_kit::relatedness::RelatednessError| e.to_string())
}

fn parse_covariance(s: &str) -> Result<CovarianceType, String> {
    s.parse().map_err(|e: coherence_kit::econometrics::EconError| e.to_string())
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Patent-family table.
    #[arg(long)]
    pub families: Option<PathBuf>,
    /// Firm financials table.
    #[arg(long)]
    pub financials: Option<PathBuf>,
    #[arg(long)]
    pub year: Option<i32>,
    /// IPC depth to truncate codes to.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub level: Option<u8>,
    /// Keep triadic families only.
    #[arg(long)]
    pub triadic: bool,
    /// Binarization threshold on accumulated family weight.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Agents the taxonomy matrix is estimated over: firm or country.
    #[arg(long, value_parser = parse_aggregation)]
    pub aggregate: Option<Aggregation>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.families, self.families.clone());
        set(&mut c.financials, self.financials.clone());
        set(&mut c.year, self.year);
        set(&mut c.level, self.level);
        c.triadic_only |= self.triadic;
        set_value(&mut c.threshold, self.threshold);
        set_value(&mut c.aggregation, self.aggregate);
        set(&mut c.seed, self.seed);
        set_value(&mut c.out, self.out.clone());
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RelatednessArgs {
    #[command(flatten)]
    pub common: Common,
    /// Matrix written by `ingest` (`binary.csv` with its `.json` sidecar).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<KindChoice>,
    #[arg(long, value_enum)]
    pub format: Option<FormatChoice>,
    /// Also write the maximum spanning tree of each matrix.
    #[arg(long)]
    pub tree: bool,
}

#[derive(Debug, Args)]
pub struct CoherenceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Adjacency CSV of a given relatedness matrix instead of estimated B.
    #[arg(long)]
    pub relatedness: Option<PathBuf>,
    /// Also compute WAR/WARN/COH.
    #[arg(long)]
    pub legacy: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub relatedness: Option<PathBuf>,
    /// Equal-count bins of the binned quantile curves.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Cells per axis of the heat grids.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Grid cells with fewer points are left empty.
    #[arg(long)]
    pub min_count: Option<usize>,
    /// classical or hc1.
    #[arg(long, value_parser = parse_covariance)]
    pub covariance: Option<CovarianceType>,
    #[arg(long)]
    pub legacy: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of firms.
    #[arg(long)]
    pub firms: Option<usize>,
    /// Write the three-firm toy fixture and its relatedness matrix instead.
    #[arg(long)]
    pub toy: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("coherence-kit").chain(args.iter().copied()))
    }

    #[test]
    fn flags_override_defaults() {
        let cli = parse(&["analyze", "--year", "2012", "--aggregate", "country", "--covariance", "hc1", "--bins", "7"]).unwrap();
        let c = cli.command.resolve().unwrap();
        assert_eq!(c.year, Some(2012));
        assert_eq!(c.aggregation, Aggregation::Country);
        assert_eq!(c.covariance, CovarianceType::Hc1);
        assert_eq!(c.bins, 7);
    }

    #[test]
    fn flags_win_over_config() {
        let dir = std::env::temp_dir().join(format!("ck-args-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "year = 2001\nseed = 5\nkind = \"tau\"\n").unwrap();
        let p = path.to_str().unwrap();
        let c = parse(&["relatedness", "--config", p, "--year", "2003"]).unwrap().command.resolve().unwrap();
        assert_eq!(c.year, Some(2003));
        assert_eq!(c.kind, KindChoice::Tau);
        assert_eq!(c.synth.seed, 5);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn bad_values_are_usage_errors() {
        assert!(parse(&["ingest", "--level", "7"]).is_err());
        assert!(parse(&["ingest", "--aggregate", "region"]).is_err());
        assert!(parse(&["relatedness", "--kind", "jaccard"]).is_err());
        let missing = parse(&["ingest", "--config", "/nonexistent/run.toml"]).unwrap();
        assert_eq!(missing.command.resolve().unwrap_err().exit_code(), 2);
    }
}
