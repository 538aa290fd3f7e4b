use coherence_kit::coherence::gamma;
use coherence_kit::econometrics::{heat_grid_xy, table_specs, HeatGrid, RegressionResult, Variable};
use coherence_kit::pipeline::{run, PipelineOptions};
use coherence_kit::synth::{evaluate_recovery, generate, toy_taxonomy, GeneratorConfig, RecoveryReport, TOY_FIRMS, TOY_M};
use coherence_kit::{BipartiteMatrix, RelatednessMatrix};
use serde::Serialize;

/// Larger populations make the page unresponsive.
pub const MAX_FIRMS: usize = 20_000;

const TOY_TECHS: usize = 11;

pub fn toy_default() -> Vec<u8> {
    TOY_M.iter().flatten().copied().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToyFirm {
    pub firm: String,
    pub gamma: Vec<f64>,
    pub diversification: usize,
    /// None for a firm that owns nothing.
    pub coherent_diversification: Option<f64>,
}

pub fn toy_coherence(cells: &[u8]) -> Result<Vec<ToyFirm>, String> {
    let n = TOY_FIRMS.len() * TOY_TECHS;
    if cells.len() != n {
        return Err(format!("expected {n} cells, got {}", cells.len()));
    }
    if cells.iter().any(|&c| c > 1) {
        return Err("cells must be 0 or 1".into());
    }
    let b = toy_taxonomy();
    let cell = |f: usize, t: usize| cells[f * TOY_TECHS + t] == 1;
    // the portfolio matrix has no empty rows or columns, so it is built over
    // the firms and technologies in use
    let owners: Vec<usize> = (0..TOY_FIRMS.len()).filter(|&f| (0..TOY_TECHS).any(|t| cell(f, t))).collect();
    let used: Vec<usize> = (0..TOY_TECHS).filter(|&t| owners.iter().any(|&f| cell(f, t))).collect();
    let mut rows = vec![vec![0.0; TOY_TECHS]; TOY_FIRMS.len()];
    if !owners.is_empty() {
        let dense: Vec<Vec<f64>> = owners
            .iter()
            .map(|&f| used.iter().map(|&t| f64::from(u8::from(cell(f, t)))).collect())
            .collect();
        let firms = owners.iter().map(|&f| TOY_FIRMS[f].to_string()).collect();
        let codes: Vec<String> = used.iter().map(|&t| b.tech_ids()[t].clone()).collect();
        let m = BipartiteMatrix::from_dense_with_ids(firms, codes.clone(), &dense).map_err(|e| e.to_string())?;
        let sub_data = used.iter().flat_map(|&i| used.iter().map(move |&j| (i, j))).map(|(i, j)| b.get(i, j)).collect();
        let sub = RelatednessMatrix::from_dense(codes.clone(), b.kind(), b.source(), sub_data);
        let g = gamma(&m, &sub).map_err(|e| e.to_string())?;
        for (r, &f) in owners.iter().enumerate() {
            for t in 0..TOY_TECHS {
                rows[f][t] = match used.iter().position(|&u| u == t) {
                    Some(c) => g.get(r, c),
                    // nobody owns t: sum its relatedness to the firm's techs
                    None => used.iter().filter(|&&s| cell(f, s)).map(|&s| b.get(s, t)).sum(),
                };
            }
        }
    }
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(f, row)| {
            let owned: Vec<usize> = (0..TOY_TECHS).filter(|&t| cell(f, t)).collect();
            let big = (!owned.is_empty())
                .then(|| owned.iter().map(|&t| row[t]).sum::<f64>() / owned.len() as f64);
            ToyFirm {
                firm: TOY_FIRMS[f].to_string(),
                gamma: row,
                diversification: owned.len(),
                coherent_diversification: big,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecOutcome {
    pub label: &'static str,
    pub result: Option<RegressionResult>,
    pub error: Option<String>,
}

/// Standardized frame columns, one entry per firm.
#[derive(Debug, Clone, Serialize)]
pub struct Columns {
    pub productivity: Vec<f64>,
    pub size: Vec<f64>,
    pub diversification: Vec<f64>,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Exploration {
    pub firms: usize,
    pub families: usize,
    pub codes: usize,
    pub regressions: Vec<SpecOutcome>,
    pub recovery: Option<RecoveryReport>,
    pub columns: Columns,
}

pub fn synth_explore(config_json: &str) -> Result<Exploration, String> {
    let config: GeneratorConfig = if config_json.trim().is_empty() {
        GeneratorConfig::default()
    } else {
        serde_json::from_str(config_json).map_err(|e| format!("bad config: {e}"))?
    };
    if config.n_firms > MAX_FIRMS {
        return Err(format!("at most {MAX_FIRMS} firms in the browser"));
    }
    let data = generate(&config).map_err(|e| e.to_string())?;
    let out = run(&data.records, &data.financials, &PipelineOptions::new(config.year)).map_err(|e| e.to_string())?;
    let recovery = match (&out.regressions[0], &out.regressions[3]) {
        (Ok(full), div) => Some(evaluate_recovery(&data.truth, &out.table, full, div.as_ref().ok())),
        _ => None,
    };
    let regressions = table_specs()
        .iter()
        .zip(&out.regressions)
        .map(|(s, r)| SpecOutcome {
            label: s.label,
            result: r.as_ref().ok().cloned(),
            error: r.as_ref().err().map(|e| e.to_string()),
        })
        .collect();
    let col = |v| out.frame.column(v).to_vec();
    Ok(Exploration {
        firms: data.financials.len(),
        families: data.records.len(),
        codes: out.binary.n_cols(),
        regressions,
        recovery,
        columns: Columns {
            productivity: col(Variable::Productivity),
            size: col(Variable::Size),
            diversification: col(Variable::Diversification),
            gamma: col(Variable::Gamma),
        },
    })
}

pub fn heat_grid(x: &[f64], y: &[f64], response: &[f64], cells: usize, min_count: usize) -> Result<HeatGrid, String> {
    heat_grid_xy(x, y, response, cells, min_count).map_err(|e| e.to_string())
}
