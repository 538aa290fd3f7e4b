//! Synthetic firm populations with planted product lines.
//!
//! Each product line is a contiguous block of technologies; adjacent lines
//! may share a fraction of their techs. A firm owns the union of the blocks
//! of the lines it runs, and its log productivity is driven by size and by
//! either the mean size of the blocks its technologies sit in or its
//! computed Γ.

mod recovery;
mod toy;

pub use recovery::{evaluate_recovery, spearman, RecoveryReport};
pub use toy::{toy_records, toy_taxonomy, TOY_FIRMS, TOY_M};

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coherence::coherent_diversification_from;
use crate::ingest::{build_matrix, BuildOptions, FirmFinancials, PatentFamilyRecord};
use crate::relatedness::{taxonomy, DegreeVectors};
use crate::ipc::IpcCode;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// What drives log productivity besides size.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductivityDriver {
    /// Tech-weighted mean size of the firm's blocks.
    #[default]
    MeanBlockSize,
    /// ln Γ, with Γ computed from the generated portfolios and the
    /// taxonomy matrix estimated on the whole population.
    CoherentDiversification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_firms: usize,
    pub n_products: usize,
    /// Block size of each product line, cycled over the lines.
    pub techs_per_product: Vec<usize>,
    /// Fraction of the smaller of two adjacent blocks that they share.
    pub overlap: f64,
    /// Each firm runs a uniform number of distinct lines in this range.
    pub min_lines: usize,
    pub max_lines: usize,
    pub n_countries: usize,
    pub year: i32,
    /// Natural-log mean and sd of total assets.
    pub log_size_mean: f64,
    pub log_size_sd: f64,
    pub log_employees_mean: f64,
    pub log_employees_sd: f64,
    pub beta0: f64,
    pub beta_size: f64,
    pub beta_gamma: f64,
    pub sigma: f64,
    pub driver: ProductivityDriver,
    /// Largest number of codes per generated family.
    pub max_codes_per_family: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 1,
            n_firms: 5000,
            n_products: 60,
            techs_per_product: vec![2, 4, 8],
            overlap: 0.0,
            min_lines: 1,
            max_lines: 4,
            n_countries: 25,
            year: 2010,
            log_size_mean: 15.0,
            log_size_sd: 1.0,
            log_employees_mean: 4.0,
            log_employees_sd: 1.0,
            beta0: 3.0,
            beta_size: 0.1,
            beta_gamma: 0.1,
            sigma: 0.5,
            driver: ProductivityDriver::MeanBlockSize,
            max_codes_per_family: 3,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.to_string()));
        if self.n_firms == 0 || self.n_products == 0 || self.n_countries == 0 {
            return bad("firm, product and country counts must be positive");
        }
        if self.techs_per_product.is_empty() || self.techs_per_product.contains(&0) {
            return bad("block sizes must be positive");
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return bad("overlap must lie in [0, 1]");
        }
        if self.min_lines == 0 || self.min_lines > self.max_lines {
            return bad("line counts need 1 <= min_lines <= max_lines");
        }
        if self.max_lines > self.n_products {
            return bad("max_lines exceeds the number of product lines");
        }
        if self.max_codes_per_family == 0 {
            return bad("max_codes_per_family must be positive");
        }
        if !(self.sigma >= 0.0) || !(self.log_size_sd >= 0.0) || !(self.log_employees_sd >= 0.0) {
            return bad("standard deviations must be non-negative");
        }
        if self.layout().1 > MAX_SYNTHETIC_CODES {
            return bad("too many technologies for the synthetic code space");
        }
        Ok(())
    }

    /// Block of every product line (as tech indices) and the total number
    /// of technologies.
    pub fn layout(&self) -> (Vec<Vec<usize>>, usize) {
        let sizes: Vec<usize> = (0..self.n_products)
            .map(|p| self.techs_per_product[p % self.techs_per_product.len()])
            .collect();
        let mut blocks = Vec::with_capacity(sizes.len());
        let mut start = 0usize;
        for (p, &s) in sizes.iter().enumerate() {
            if p > 0 {
                let shared = (self.overlap * s.min(sizes[p - 1]) as f64).round() as usize;
                // keep at least one tech of each line private
                let shared = shared.min(s.min(sizes[p - 1]) - 1);
                start -= shared;
            }
            blocks.push((start..start + s).collect());
            start += s;
        }
        (blocks, start)
    }
}

const MAX_SYNTHETIC_CODES: usize = 8 * 99 * 26;

/// Subclass-level code for technology `i`; codes sort in index order.
pub fn synthetic_code(i: usize) -> IpcCode {
    assert!(i < MAX_SYNTHETIC_CODES, "synthetic code index out of range");
    let section = (b'A' + (i / (99 * 26)) as u8) as char;
    let class = (i / 26) % 99 + 1;
    let letter = (b'A' + (i % 26) as u8) as char;
    IpcCode::parse(&format!("{section}{class:02}{letter}")).expect("valid synthetic code")
}

/// Ground truth for one generated firm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmTruth {
    pub firm_id: String,
    pub country: String,
    pub lines: Vec<usize>,
    pub block_sizes: Vec<usize>,
    /// Tech-weighted mean block size: Σ s² / Σ s over the firm's lines.
    pub mean_block_size: f64,
    pub n_techs: usize,
    /// Γ used as productivity driver, when the driver is Γ.
    pub gamma: Option<f64>,
    pub size: f64,
    pub productivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    pub config: GeneratorConfig,
    pub firms: Vec<FirmTruth>,
}

impl SyntheticTruth {
    /// `firm_id,country,lines,block_sizes,mean_block_size,n_techs,gamma,size,productivity`
    /// with list fields joined by `;` and `gamma` blank unless it drove
    /// productivity.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SynthError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "firm_id",
            "country",
            "lines",
            "block_sizes",
            "mean_block_size",
            "n_techs",
            "gamma",
            "size",
            "productivity",
        ])?;
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        for f in &self.firms {
            w.write_record([
                f.firm_id.clone(),
                f.country.clone(),
                join(&f.lines),
                join(&f.block_sizes),
                f.mean_block_size.to_string(),
                f.n_techs.to_string(),
                f.gamma.map(|g| g.to_string()).unwrap_or_default(),
                f.size.to_string(),
                f.productivity.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub records: Vec<PatentFamilyRecord>,
    pub financials: Vec<FirmFinancials>,
    pub truth: SyntheticTruth,
}

fn population_gamma(
    records: &[PatentFamilyRecord],
    year: i32,
) -> Result<HashMap<String, f64>, SynthError> {
    let fail = |e: String| SynthError::InvalidConfig(format!("cannot compute Γ driver: {e}"));
    let m = build_matrix(records, &BuildOptions::new(year)).map_err(|e| fail(e.to_string()))?;
    let degrees = DegreeVectors::from_binary(&m).map_err(|e| fail(e.to_string()))?;
    let b = taxonomy(&m, &degrees).map_err(|e| fail(e.to_string()))?;
    let g = coherent_diversification_from(&m, &b).map_err(|e| fail(e.to_string()))?;
    Ok(m.row_ids().iter().cloned().zip(g).collect())
}

fn firm_id(i: usize, width: usize) -> String {
    format!("F{i:0width$}")
}

/// Generate a population. Firm `i` draws from its own ChaCha stream, so the
/// output depends only on the config.
pub fn generate(config: &GeneratorConfig) -> Result<SyntheticData, SynthError> {
    config.validate()?;
    let (blocks, _) = config.layout();
    let codes: Vec<IpcCode> = (0..config.layout().1).map(synthetic_code).collect();
    let products: Vec<usize> = (0..config.n_products).collect();
    let width = config.n_firms.to_string().len();
    let cwidth = config.n_countries.to_string().len();
    let size_dist = Normal::new(config.log_size_mean, config.log_size_sd)
        .map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let emp_dist = Normal::new(config.log_employees_mean, config.log_employees_sd)
        .map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let noise = Normal::new(0.0, config.sigma).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;

    let mut records = Vec::new();
    let mut financials = Vec::with_capacity(config.n_firms);
    let mut firms = Vec::with_capacity(config.n_firms);
    let mut draws = Vec::with_capacity(config.n_firms);
    for i in 0..config.n_firms {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(i as u64);
        let id = firm_id(i, width);
        let k = rng.random_range(config.min_lines..=config.max_lines);
        let mut lines: Vec<usize> = products.choose_multiple(&mut rng, k).copied().collect();
        lines.sort_unstable();
        let block_sizes: Vec<usize> = lines.iter().map(|&p| blocks[p].len()).collect();
        let total: usize = block_sizes.iter().sum();
        let mean_block_size =
            block_sizes.iter().map(|&s| (s * s) as f64).sum::<f64>() / total as f64;
        let techs: BTreeSet<usize> = lines.iter().flat_map(|&p| blocks[p].iter().copied()).collect();

        let mut order: Vec<usize> = techs.iter().copied().collect();
        order.shuffle(&mut rng);
        let mut start = 0;
        let mut fam = 0;
        while start < order.len() {
            let len = rng.random_range(1..=config.max_codes_per_family).min(order.len() - start);
            records.push(PatentFamilyRecord {
                family_id: format!("{id}-{fam:04}"),
                year: config.year,
                applicants: BTreeSet::from([id.clone()]),
                tech_codes: order[start..start + len].iter().map(|&t| codes[t].clone()).collect(),
                triadic: true,
            });
            start += len;
            fam += 1;
        }

        let country = format!("C{:0cwidth$}", rng.random_range(0..config.n_countries));
        let size = size_dist.sample(&mut rng).exp();
        let employees = emp_dist.sample(&mut rng).exp().round().max(1.0);
        let eps = noise.sample(&mut rng);
        draws.push((employees, eps));
        financials.push(FirmFinancials {
            firm_id: id.clone(),
            value_added: 0.0,
            employees,
            total_assets: size,
            country: country.clone(),
            year: config.year,
        });
        firms.push(FirmTruth {
            firm_id: id,
            country,
            lines,
            block_sizes,
            mean_block_size,
            n_techs: techs.len(),
            gamma: None,
            size,
            productivity: 0.0,
        });
    }

    if config.driver == ProductivityDriver::CoherentDiversification {
        let gammas = population_gamma(&records, config.year)?;
        for f in &mut firms {
            f.gamma = Some(gammas[&f.firm_id]);
        }
    }
    for ((f, fin), (employees, eps)) in firms.iter_mut().zip(&mut financials).zip(draws) {
        let driver = match config.driver {
            ProductivityDriver::MeanBlockSize => f.mean_block_size,
            ProductivityDriver::CoherentDiversification => f.gamma.map_or(0.0, f64::ln),
        };
        f.productivity =
            (config.beta0 + config.beta_size * f.size.ln() + config.beta_gamma * driver + eps).exp();
        fin.value_added = f.productivity * employees;
    }
    Ok(SyntheticData {
        records,
        financials,
        truth: SyntheticTruth {
            config: config.clone(),
            firms,
        },
    })
}
