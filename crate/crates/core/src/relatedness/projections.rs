use super::{Aggregation, DegreeVectors, RelatednessError, RelatednessKind, RelatednessMatrix};
use crate::matrix::BipartiteMatrix;

/// Row `t` of Σ_f w_f · M[f][t] · M[f][·], summed over agents in increasing
/// row order. Entry (t, t′) and (t′, t) see the same addition sequence, so
/// the projection is exactly symmetric.
fn weighted_row(
    m: &BipartiteMatrix,
    holders: &[usize],
    weight: &[f64],
    scratch: &mut Vec<f64>,
    touched: &mut Vec<usize>,
) -> Vec<(usize, f64)> {
    for &f in holders {
        let w = weight[f];
        for &t2 in m.row_cols(f) {
            if scratch[t2] == 0.0 {
                touched.push(t2);
            }
            scratch[t2] += w;
        }
    }
    touched.sort_unstable();
    let row = touched.iter().map(|&t2| (t2, scratch[t2])).collect();
    for &t2 in touched.iter() {
        scratch[t2] = 0.0;
    }
    touched.clear();
    row
}

fn project(m: &BipartiteMatrix, weight: &[f64]) -> Vec<Vec<(usize, f64)>> {
    let by_col = m.column_rows();
    let n = m.n_cols();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        by_col
            .par_iter()
            .map_init(
                || (vec![0.0; n], Vec::new()),
                |(scratch, touched), holders| weighted_row(m, holders, weight, scratch, touched),
            )
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = vec![0.0; n];
        let mut touched = Vec::new();
        by_col
            .iter()
            .map(|holders| weighted_row(m, holders, weight, &mut scratch, &mut touched))
            .collect()
    }
}

/// Co-occurrence counts J[t][t′] = Σ_f M[f][t]·M[f][t′]; the diagonal is
/// the ubiquity.
pub fn cooccurrence(m: &BipartiteMatrix) -> Result<RelatednessMatrix, RelatednessError> {
    m.require_binary().map_err(|_| RelatednessError::NotBinary)?;
    let ones = vec![1.0; m.n_rows()];
    let rows = project(m, &ones);
    Ok(RelatednessMatrix::from_rows(
        m.col_ids().to_vec(),
        RelatednessKind::Cooccurrence,
        Aggregation::Firm,
        rows,
    ))
}

/// Output of [`tau`]: the standardized matrix plus the off-diagonal pairs
/// whose null variance vanished (set to 0).
#[derive(Debug, Clone)]
pub struct TauResult {
    pub matrix: RelatednessMatrix,
    pub degenerate: Vec<(usize, usize)>,
}

/// Standardized excess co-occurrence under a hypergeometric null with fixed
/// ubiquities: τ = (J − μ)/σ, μ = u·u′/F,
/// σ² = μ·(1 − u/F)·(F − u′)/(F − 1). The diagonal is 0.
pub fn tau(
    j: &RelatednessMatrix,
    degrees: &DegreeVectors,
    n_agents: usize,
) -> Result<TauResult, RelatednessError> {
    if j.kind() != RelatednessKind::Cooccurrence {
        return Err(RelatednessError::Inconsistent(format!(
            "tau needs a co-occurrence matrix, got {}",
            j.kind()
        )));
    }
    let n = j.n();
    if degrees.ubiquity.len() != n {
        return Err(RelatednessError::Inconsistent(
            "ubiquity vector length differs from matrix size".into(),
        ));
    }
    for (t, &u) in degrees.ubiquity.iter().enumerate() {
        if j.get(t, t) != u as f64 {
            return Err(RelatednessError::Inconsistent(format!(
                "co-occurrence diagonal at {t} is {} but ubiquity is {u}",
                j.get(t, t)
            )));
        }
        if u > n_agents {
            return Err(RelatednessError::Inconsistent(format!(
                "ubiquity {u} exceeds agent count {n_agents}"
            )));
        }
    }
    let f = n_agents as f64;
    let mut data = vec![0.0; n * n];
    let mut degenerate = Vec::new();
    let jd = j.to_dense();
    for a in 0..n {
        for b in a + 1..n {
            // evaluate on the ordered degree pair so τ depends only on
            // {u, u′}, J and F, whatever the column order
            let (u1, u2) = {
                let (x, y) = (degrees.ubiquity[a], degrees.ubiquity[b]);
                (x.min(y) as f64, x.max(y) as f64)
            };
            let mean = u1 * u2 / f;
            let var = if n_agents > 1 {
                mean * (1.0 - u1 / f) * (f - u2) / (f - 1.0)
            } else {
                0.0
            };
            if var > 0.0 {
                let v = (jd[a * n + b] - mean) / var.sqrt();
                data[a * n + b] = v;
                data[b * n + a] = v;
            } else {
                degenerate.push((a, b));
                degenerate.push((b, a));
            }
        }
    }
    degenerate.sort_unstable();
    Ok(TauResult {
        matrix: RelatednessMatrix::from_dense(j.tech_ids().to_vec(), RelatednessKind::Tau, j.source(), data),
        degenerate,
    })
}

/// φ[t][t′] = J[t][t′] / max(u_t, u_t′).
pub fn proximity(m: &BipartiteMatrix) -> Result<RelatednessMatrix, RelatednessError> {
    let j = cooccurrence(m)?;
    let degrees = DegreeVectors::from_binary(m)?;
    let u = &degrees.ubiquity;
    let rows = (0..j.n())
        .map(|a| {
            j.row_nonzeros(a)
                .into_iter()
                .map(|(b, v)| (b, v / u[a].max(u[b]) as f64))
                .collect()
        })
        .collect();
    Ok(RelatednessMatrix::from_rows(
        m.col_ids().to_vec(),
        RelatednessKind::Proximity,
        Aggregation::Firm,
        rows,
    ))
}

/// B[t][t′] = (1 / max(u_t, u_t′)) · Σ_f M[f][t]·M[f][t′] / d_f, diagonal
/// included.
pub fn taxonomy(
    m: &BipartiteMatrix,
    degrees: &DegreeVectors,
) -> Result<RelatednessMatrix, RelatednessError> {
    m.require_binary().map_err(|_| RelatednessError::NotBinary)?;
    if degrees.diversification.len() != m.n_rows() || degrees.ubiquity.len() != m.n_cols() {
        return Err(RelatednessError::Inconsistent(
            "degree vectors do not match matrix shape".into(),
        ));
    }
    if let Some(f) = degrees.diversification.iter().position(|&d| d == 0) {
        return Err(RelatednessError::ZeroDegree(m.row_ids()[f].clone()));
    }
    if let Some(t) = degrees.ubiquity.iter().position(|&u| u == 0) {
        return Err(RelatednessError::ZeroDegree(m.col_ids()[t].clone()));
    }
    let inv_d: Vec<f64> = degrees.diversification.iter().map(|&d| 1.0 / d as f64).collect();
    let u = &degrees.ubiquity;
    let rows = project(m, &inv_d)
        .into_iter()
        .enumerate()
        .map(|(a, row)| {
            row.into_iter()
                .map(|(b, s)| (b, s / u[a].max(u[b]) as f64))
                .collect()
        })
        .collect();
    Ok(RelatednessMatrix::from_rows(
        m.col_ids().to_vec(),
        RelatednessKind::Taxonomy,
        Aggregation::Firm,
        rows,
    ))
}
