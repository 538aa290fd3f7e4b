use std::collections::HashMap;
use std::path::{Path, PathBuf};

use coherence_kit::coherence::{CoherenceOptions, CoherenceTable, PortfolioWeights, SINGLETON_FLAG};
use coherence_kit::econometrics::{
    binned_quantiles, format_table, heat_grid, make_frame, table_specs, EconError, RegressionResult,
    Transforms, Variable,
};
use coherence_kit::ingest::io::{read_input, read_triplets, save_matrix, write_families, write_financials, MatrixSidecar};
use coherence_kit::ingest::{active_families, aggregate_rows, load_financials, parse_family_records, BuildOptions, FirmFinancials, PatentFamilyRecord};
use coherence_kit::pipeline::{build_matrices, country_map, taxonomy_for, PipelineOptions};
use coherence_kit::relatedness::{
    cooccurrence, export_matrix, export_tree, import_adjacency, proximity, spanning_tree, tau,
    taxonomy, Aggregation, DegreeVectors, NetworkFormat, RelatednessKind, RelatednessMatrix, TreeMode,
};
use coherence_kit::synth::{evaluate_recovery, generate, toy_records, toy_taxonomy};
use coherence_kit::BipartiteMatrix;
use serde::Serialize;
use serde_json::json;

use crate::args::Command;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest;

/// Output directory plus the names of the files written into it.
struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
        Ok(Output { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.path(name);
        std::fs::write(&path, data).map_err(|e| CliError::write(&path, e))
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
        self.bytes(name, (text + "\n").as_bytes())
    }

    fn csv<E: std::fmt::Display>(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> Result<(), E>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| CliError::write(&self.dir.join(name), e))?;
        self.bytes(name, &buf)
    }
}

/// Inputs actually read during a run, hashed into the manifest.
#[derive(Default)]
struct Inputs(Vec<PathBuf>);

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        if !path.exists() {
            return Err(CliError::missing(path));
        }
        let data = read_input(path)?;
        self.0.push(path.to_path_buf());
        Ok(data)
    }
}

pub fn run(command: &Command) -> Result<(), CliError> {
    let cfg = command.resolve()?;
    let mut inputs = Inputs::default();
    let mut out = Output::create(&cfg.out)?;
    match command {
        Command::Ingest(_) => ingest(&cfg, &mut inputs, &mut out)?,
        Command::Relatedness(_) => relatedness(&cfg, &mut inputs, &mut out)?,
        Command::Coherence(_) => coherence(&cfg, &mut inputs, &mut out)?,
        Command::Analyze(_) => {
            // Write the manifest even when no specification could be fitted.
            let result = analyze(&cfg, &mut inputs, &mut out);
            manifest::write(&out.dir, command.name(), &cfg, &inputs.0, out.files.clone())?;
            return result;
        }
        Command::Synth(a) if a.toy => synth_toy(&cfg, &mut out)?,
        Command::Synth(_) => synth(&cfg, &mut out)?,
    }
    manifest::write(&out.dir, command.name(), &cfg, &inputs.0, out.files)
}

/// Stdout is informational; a closed pipe must not fail the run.
fn print(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(value: &serde_json::Value) {
    print(&(serde_json::to_string_pretty(value).expect("json value serializes") + "\n"));
}

fn families(cfg: &RunConfig, inputs: &mut Inputs) -> Result<Vec<PatentFamilyRecord>, CliError> {
    let path = cfg
        .families
        .as_ref()
        .ok_or_else(|| CliError::Usage("no families input: pass --families or set `families`".into()))?;
    Ok(parse_family_records(&inputs.read(path)?, &cfg.schema)?)
}

fn financials(cfg: &RunConfig, inputs: &mut Inputs) -> Result<Option<Vec<FirmFinancials>>, CliError> {
    let Some(path) = &cfg.financials else {
        return Ok(None);
    };
    let load = load_financials(&inputs.read(path)?)?;
    if !load.rejected.is_empty() {
        eprintln!("warning: {} financial rows rejected", load.rejected.len());
        for r in load.rejected.iter().take(5) {
            eprintln!("  line {}: {}", r.line, r.error);
        }
    }
    Ok(Some(load.records))
}

fn require_financials(cfg: &RunConfig, inputs: &mut Inputs, why: &str) -> Result<Vec<FirmFinancials>, CliError> {
    financials(cfg, inputs)?
        .ok_or_else(|| CliError::Usage(format!("{why} needs --financials")))
}

fn countries(cfg: &RunConfig, inputs: &mut Inputs) -> Result<HashMap<String, String>, CliError> {
    match cfg.aggregation {
        Aggregation::Firm => Ok(HashMap::new()),
        Aggregation::Country => Ok(country_map(&require_financials(cfg, inputs, "country aggregation")?)),
    }
}

fn resolve_year(cfg: &RunConfig, records: &[PatentFamilyRecord]) -> Result<i32, CliError> {
    cfg.year
        .or_else(|| records.iter().map(|r| r.year).max())
        .ok_or_else(|| CliError::Data("the families input holds no records".into()))
}

fn pipeline_options(cfg: &RunConfig, year: i32) -> PipelineOptions {
    PipelineOptions {
        build: BuildOptions {
            year,
            triadic_only: cfg.triadic_only,
            binarize: true,
            threshold: cfg.threshold,
        },
        level: cfg.level,
        aggregation: cfg.aggregation,
        transforms: Transforms::default(),
        covariance: cfg.covariance,
        legacy: cfg.legacy,
    }
}

/// Weighted and binary matrices, from a saved matrix or built from the
/// families, plus the year they cover when known.
fn matrices(cfg: &RunConfig, inputs: &mut Inputs) -> Result<(BipartiteMatrix, BipartiteMatrix, Option<i32>), CliError> {
    if let Some(path) = &cfg.matrix {
        let sidecar_path = path.with_extension("json");
        let sidecar: MatrixSidecar = serde_json::from_slice(&inputs.read(&sidecar_path)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", sidecar_path.display())))?;
        let m = read_triplets(&inputs.read(path)?, Some(&sidecar))?;
        let binary = if m.is_binary() {
            m.clone()
        } else {
            m.binarize(cfg.threshold)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        };
        return Ok((m, binary, sidecar.year));
    }
    let records = families(cfg, inputs)?;
    let year = resolve_year(cfg, &records)?;
    let (w, b) = build_matrices(&records, &pipeline_options(cfg, year))?;
    Ok((w, b, Some(year)))
}

fn relatedness_for(
    cfg: &RunConfig,
    binary: &BipartiteMatrix,
    countries: &HashMap<String, String>,
    inputs: &mut Inputs,
) -> Result<RelatednessMatrix, CliError> {
    match &cfg.relatedness {
        Some(path) => {
            let r = import_adjacency(&inputs.read(path)?, RelatednessKind::Taxonomy, cfg.aggregation)?;
            Ok(r.aligned_to(binary.col_ids())?)
        }
        None => Ok(taxonomy_for(binary, cfg.aggregation, countries)?),
    }
}

fn coherence_table(
    cfg: &RunConfig,
    weighted: &BipartiteMatrix,
    binary: &BipartiteMatrix,
    b: &RelatednessMatrix,
) -> Result<CoherenceTable, CliError> {
    let legacy = if cfg.legacy {
        let degrees = DegreeVectors::from_binary(binary)?;
        let t = tau(&cooccurrence(binary)?, &degrees, binary.n_rows())?.matrix;
        Some((t, PortfolioWeights::from_matrix(weighted)))
    } else {
        None
    };
    Ok(CoherenceTable::compute(
        binary,
        b,
        legacy.as_ref().map(|(t, w)| (t, w)),
        CoherenceOptions::default(),
    )?)
}

fn ingest(cfg: &RunConfig, inputs: &mut Inputs, out: &mut Output) -> Result<(), CliError> {
    let records = families(cfg, inputs)?;
    let year = resolve_year(cfg, &records)?;
    let (weighted, binary) = build_matrices(&records, &pipeline_options(cfg, year))?;
    for (stem, m) in [("weighted", &weighted), ("binary", &binary)] {
        let sidecar = MatrixSidecar {
            year: Some(year),
            level: cfg.level,
            binarize: stem == "binary",
            threshold: cfg.threshold,
            ..MatrixSidecar::describe(m)
        };
        save_matrix(m, &sidecar, &out.dir, stem)?;
        out.files.push(format!("{stem}.csv"));
        out.files.push(format!("{stem}.json"));
    }
    let n_families = active_families(&records, year, cfg.triadic_only).count();
    let summary = json!({
        "year": year,
        "families": n_families,
        "firms": binary.n_rows(),
        "codes": binary.n_cols(),
        "nnz": binary.nnz(),
        "density": binary.density(),
    });
    out.json("summary.json", &summary)?;
    print_json(&summary);
    Ok(())
}

fn relatedness(cfg: &RunConfig, inputs: &mut Inputs, out: &mut Output) -> Result<(), CliError> {
    let (_, binary, _) = matrices(cfg, inputs)?;
    let countries = countries(cfg, inputs)?;
    let agents = match cfg.aggregation {
        Aggregation::Firm => binary,
        Aggregation::Country => aggregate_rows(&binary, &countries, Some(0.0))?,
    };
    let degrees = DegreeVectors::from_binary(&agents)?;
    let j = cooccurrence(&agents)?;
    let mut written = Vec::new();
    let mut degenerate = None;
    let ext = cfg.format.extension();
    for kind in cfg.kind.kinds() {
        let r = match kind {
            RelatednessKind::Cooccurrence => j.clone(),
            RelatednessKind::Tau => {
                let t = tau(&j, &degrees, agents.n_rows())?;
                degenerate = Some(t.degenerate.len());
                t.matrix
            }
            RelatednessKind::Proximity => proximity(&agents)?,
            RelatednessKind::Taxonomy => taxonomy(&agents, &degrees)?,
        }
        .with_source(cfg.aggregation);
        let file = format!("{}.{ext}", kind.name());
        out.bytes(&file, &export_matrix(&r, cfg.format.format()))?;
        let mut entry = json!({ "kind": kind.name(), "file": file });
        if cfg.tree {
            let tree = spanning_tree(&r, TreeMode::Max)?;
            let tree_file = format!("{}_tree.{ext}", kind.name());
            let format = match cfg.format.format() {
                NetworkFormat::Adjacency => NetworkFormat::EdgeList,
                f => f,
            };
            out.bytes(&tree_file, &export_tree(&tree, format))?;
            entry["tree_file"] = json!(tree_file);
            entry["tree_edges"] = json!(tree.edges.len());
        }
        written.push(entry);
    }
    let summary = json!({
        "agents": agents.n_rows(),
        "technologies": agents.n_cols(),
        "aggregation": cfg.aggregation.name(),
        "matrices": written,
        "tau_degenerate_pairs": degenerate,
    });
    out.json("summary.json", &summary)?;
    print_json(&summary);
    Ok(())
}

fn coherence_summary(table: &CoherenceTable) -> serde_json::Value {
    let n = table.rows.len();
    let mean = table.rows.iter().map(|r| r.gamma_total).sum::<f64>() / n.max(1) as f64;
    json!({
        "firms": n,
        "source_aggregation": table.source_aggregation.name(),
        "mean_gamma": mean,
        "singletons": table.rows.iter().filter(|r| r.flags.iter().any(|f| f == SINGLETON_FLAG)).count(),
    })
}

fn coherence(cfg: &RunConfig, inputs: &mut Inputs, out: &mut Output) -> Result<(), CliError> {
    let (weighted, binary, _) = matrices(cfg, inputs)?;
    let countries = countries(cfg, inputs)?;
    let b = relatedness_for(cfg, &binary, &countries, inputs)?;
    let table = coherence_table(cfg, &weighted, &binary, &b)?;
    out.csv("coherence.csv", |w| table.write_csv(w))?;
    if cfg.legacy {
        let json = table.to_json().map_err(|e| CliError::Data(e.to_string()))?;
        out.bytes("coherence.json", (json + "\n").as_bytes())?;
    }
    let summary = coherence_summary(&table);
    out.json("summary.json", &summary)?;
    print_json(&summary);
    Ok(())
}

#[derive(Serialize)]
struct SpecOutcome<'a> {
    label: &'a str,
    regressors: Vec<&'static str>,
    result: Option<&'a RegressionResult>,
    error: Option<String>,
}

fn analyze(cfg: &RunConfig, inputs: &mut Inputs, out: &mut Output) -> Result<(), CliError> {
    let fins = require_financials(cfg, inputs, "analyze")?;
    let (weighted, binary, year) = matrices(cfg, inputs)?;
    let countries = match cfg.aggregation {
        Aggregation::Firm => HashMap::new(),
        Aggregation::Country => country_map(&fins),
    };
    let b = relatedness_for(cfg, &binary, &countries, inputs)?;
    let table = coherence_table(cfg, &weighted, &binary, &b)?;
    out.csv("coherence.csv", |w| table.write_csv(w))?;

    let (frame, report) = make_frame(&fins, &table, &Transforms::default(), year)?;
    out.json("frame_report.json", &report)?;

    let specs = table_specs();
    let selected: Vec<_> = cfg.specs.iter().map(|&i| &specs[i]).collect();
    let results: Vec<Result<RegressionResult, EconError>> =
        selected.iter().map(|s| s.run(&frame, cfg.covariance)).collect();
    let columns: Vec<(&str, Option<&RegressionResult>)> =
        selected.iter().zip(&results).map(|(s, r)| (s.label, r.as_ref().ok())).collect();
    let text = format_table(&columns);
    out.bytes("regressions.txt", text.as_bytes())?;
    let outcomes: Vec<SpecOutcome> = selected
        .iter()
        .zip(&results)
        .map(|(s, r)| SpecOutcome {
            label: s.label,
            regressors: s.regressors.iter().map(|v| v.label()).collect(),
            result: r.as_ref().ok(),
            error: r.as_ref().err().map(|e| e.to_string()),
        })
        .collect();
    out.json("regressions.json", &outcomes)?;

    for (name, x) in [("diversification", Variable::Diversification), ("gamma", Variable::Gamma)] {
        let curve = binned_quantiles(&frame, x, Variable::Productivity, cfg.bins, &cfg.quantiles)?;
        out.csv(&format!("curve_{name}.csv"), |w| curve.write_csv(w))?;
    }
    for (name, x) in [("diversification", Variable::Diversification), ("size", Variable::Size)] {
        let grid = heat_grid(&frame, x, Variable::Gamma, Variable::Productivity, cfg.cells, cfg.min_count)?;
        out.csv(&format!("grid_{name}_gamma.csv"), |w| grid.write_csv(w))?;
    }

    print(&text);
    let failures: Vec<(&str, &EconError)> = selected
        .iter()
        .zip(&results)
        .filter_map(|(s, r)| r.as_ref().err().map(|e| (s.label, e)))
        .collect();
    for (label, e) in &failures {
        eprintln!("warning: specification {label} failed: {e}");
    }
    if !selected.is_empty() && failures.len() == selected.len() {
        return Err(CliError::from(failures[0].1.clone()));
    }
    Ok(())
}

fn synth(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let c = &cfg.synth;
    let data = generate(c)?;
    out.csv("families.csv", |w| write_families(&data.records, &cfg.schema, w))?;
    out.csv("financials.csv", |w| write_financials(&data.financials, w))?;
    out.csv("truth.csv", |w| data.truth.write_csv(w))?;

    let opts = PipelineOptions::new(c.year);
    let run = coherence_kit::pipeline::run(&data.records, &data.financials, &opts)?;
    let recovery = match (&run.regressions[0], &run.regressions[3]) {
        (Ok(full), div) => Some(evaluate_recovery(&data.truth, &run.table, full, div.as_ref().ok())),
        (Err(e), _) => {
            eprintln!("warning: recovery regression failed: {e}");
            None
        }
    };
    out.json("recovery.json", &recovery)?;
    let summary = json!({
        "seed": c.seed,
        "firms": data.financials.len(),
        "families": data.records.len(),
        "codes": run.binary.n_cols(),
        "recovery": recovery,
    });
    print_json(&summary);
    Ok(())
}

fn synth_toy(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let year = cfg.year.unwrap_or(cfg.synth.year);
    let records = toy_records(year);
    out.csv("families.csv", |w| write_families(&records, &cfg.schema, w))?;
    out.bytes("relatedness.csv", &export_matrix(&toy_taxonomy(), NetworkFormat::Adjacency))?;
    let summary = json!({ "year": year, "firms": 3, "families": records.len(), "codes": 11 });
    print_json(&summary);
    Ok(())
}
