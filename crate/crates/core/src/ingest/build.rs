use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{IngestError, PatentFamilyRecord};
use crate::ipc::IpcLevel;
use crate::matrix::BipartiteMatrix;

/// Selection and binarization settings for [`build_matrix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub year: i32,
    pub triadic_only: bool,
    pub binarize: bool,
    /// A cell is set to 1 iff its accumulated weight is strictly greater.
    pub threshold: f64,
}

impl BuildOptions {
    pub fn new(year: i32) -> Self {
        BuildOptions {
            year,
            triadic_only: false,
            binarize: true,
            threshold: 0.0,
        }
    }
}

/// Truncate every family's codes to `level`, collapsing codes that share a
/// prefix.
pub fn truncate_codes(
    records: &[PatentFamilyRecord],
    level: u8,
) -> Result<Vec<PatentFamilyRecord>, IngestError> {
    let level = IpcLevel::from_depth(level)?;
    Ok(records
        .iter()
        .map(|r| PatentFamilyRecord {
            tech_codes: r.tech_codes.iter().map(|c| c.truncate(level)).collect(),
            ..r.clone()
        })
        .collect())
}

pub fn active_families<'a>(
    records: &'a [PatentFamilyRecord],
    year: i32,
    triadic_only: bool,
) -> impl Iterator<Item = &'a PatentFamilyRecord> {
    records
        .iter()
        .filter(move |r| r.year == year && (r.triadic || !triadic_only))
}

/// Exact per-cell weight: the multiset of unit-fraction denominators
/// contributed by families, as `denominator -> count`.
type Shares = BTreeMap<u64, u64>;

/// Build the agents × technologies matrix for one year.
///
/// Every active family carries weight 1, split equally over its distinct
/// (applicant, code) pairs. Shares are accumulated exactly and converted to
/// `f64` once per cell, so the result does not depend on record order.
pub fn build_matrix(
    records: &[PatentFamilyRecord],
    opts: &BuildOptions,
) -> Result<BipartiteMatrix, IngestError> {
    let active: Vec<&PatentFamilyRecord> =
        active_families(records, opts.year, opts.triadic_only).collect();
    if active.is_empty() {
        return Err(IngestError::EmptyYear { year: opts.year });
    }

    let applicants: BTreeSet<&str> = active
        .iter()
        .flat_map(|r| r.applicants.iter().map(String::as_str))
        .collect();
    let codes: BTreeSet<&str> = active
        .iter()
        .flat_map(|r| r.tech_codes.iter().map(|c| c.as_str()))
        .collect();
    let row_of: HashMap<&str, usize> = applicants.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let col_of: HashMap<&str, usize> = codes.iter().enumerate().map(|(i, c)| (*c, i)).collect();

    let cells = accumulate(&active, &row_of, &col_of);

    let threshold = BigRational::from_float(opts.threshold).unwrap_or_else(BigRational::zero);
    let mut cells: Vec<((usize, usize), Shares)> = cells.into_iter().collect();
    cells.sort_unstable_by_key(|(k, _)| *k);
    let mut triplets = Vec::with_capacity(cells.len());
    for ((r, c), shares) in cells {
        let exact = exact_sum(&shares);
        let value = if opts.binarize {
            if exact > threshold {
                1.0
            } else {
                continue;
            }
        } else {
            exact.to_f64().expect("finite share sum")
        };
        triplets.push((r, c, value));
    }
    if triplets.is_empty() {
        return Err(IngestError::AllPruned {
            threshold: opts.threshold,
        });
    }

    // prune rows and columns emptied by the threshold
    let n_rows = applicants.len();
    let n_cols = codes.len();
    let mut row_used = vec![false; n_rows];
    let mut col_used = vec![false; n_cols];
    for &(r, c, _) in &triplets {
        row_used[r] = true;
        col_used[c] = true;
    }
    let row_new = prefix_index(&row_used);
    let col_new = prefix_index(&col_used);
    let row_ids = applicants
        .iter()
        .zip(&row_used)
        .filter(|(_, u)| **u)
        .map(|(a, _)| a.to_string())
        .collect();
    let col_ids = codes
        .iter()
        .zip(&col_used)
        .filter(|(_, u)| **u)
        .map(|(c, _)| c.to_string())
        .collect();
    Ok(BipartiteMatrix::from_triplets(
        row_ids,
        col_ids,
        triplets.into_iter().map(|(r, c, v)| (row_new[r], col_new[c], v)),
    )?)
}

fn prefix_index(used: &[bool]) -> Vec<usize> {
    let mut next = 0;
    used.iter()
        .map(|&u| {
            let i = next;
            if u {
                next += 1;
            }
            i
        })
        .collect()
}

fn family_cells<'a>(
    record: &'a PatentFamilyRecord,
    row_of: &'a HashMap<&str, usize>,
    col_of: &'a HashMap<&str, usize>,
) -> (u64, impl Iterator<Item = (usize, usize)> + 'a) {
    let pairs = (record.applicants.len() * record.tech_codes.len()) as u64;
    let it = record.applicants.iter().flat_map(move |a| {
        let r = row_of[a.as_str()];
        record.tech_codes.iter().map(move |c| (r, col_of[c.as_str()]))
    });
    (pairs, it)
}

fn add_family(
    acc: &mut HashMap<(usize, usize), Shares>,
    record: &PatentFamilyRecord,
    row_of: &HashMap<&str, usize>,
    col_of: &HashMap<&str, usize>,
) {
    let (denominator, cells) = family_cells(record, row_of, col_of);
    for cell in cells {
        *acc.entry(cell).or_default().entry(denominator).or_insert(0) += 1;
    }
}

#[cfg(feature = "parallel")]
fn merge(mut a: HashMap<(usize, usize), Shares>, b: HashMap<(usize, usize), Shares>) -> HashMap<(usize, usize), Shares> {
    for (cell, shares) in b {
        let slot = a.entry(cell).or_default();
        for (d, n) in shares {
            *slot.entry(d).or_insert(0) += n;
        }
    }
    a
}

#[cfg(feature = "parallel")]
fn accumulate(
    active: &[&PatentFamilyRecord],
    row_of: &HashMap<&str, usize>,
    col_of: &HashMap<&str, usize>,
) -> HashMap<(usize, usize), Shares> {
    use rayon::prelude::*;
    // integer counts commute, so the chunking does not affect the result
    active
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = HashMap::new();
            for r in chunk {
                add_family(&mut acc, r, row_of, col_of);
            }
            acc
        })
        .reduce(HashMap::new, merge)
}

#[cfg(not(feature = "parallel"))]
fn accumulate(
    active: &[&PatentFamilyRecord],
    row_of: &HashMap<&str, usize>,
    col_of: &HashMap<&str, usize>,
) -> HashMap<(usize, usize), Shares> {
    let mut acc = HashMap::new();
    for r in active {
        add_family(&mut acc, r, row_of, col_of);
    }
    acc
}

fn exact_sum(shares: &Shares) -> BigRational {
    shares.iter().fold(BigRational::zero(), |sum, (&d, &n)| {
        sum + BigRational::new(BigInt::from(n), BigInt::from(d))
    })
}

/// Sum rows within groups (e.g. firms into countries). When `binarize` is
/// set, cells become 1 where the group total exceeds the threshold.
pub fn aggregate_rows(
    matrix: &BipartiteMatrix,
    grouping: &HashMap<String, String>,
    binarize: Option<f64>,
) -> Result<BipartiteMatrix, IngestError> {
    let mut groups = Vec::with_capacity(matrix.n_rows());
    for id in matrix.row_ids() {
        let g = grouping
            .get(id)
            .ok_or_else(|| IngestError::UnmappedRow(id.clone()))?;
        groups.push(g.as_str());
    }
    let group_ids: BTreeSet<&str> = groups.iter().copied().collect();
    let group_idx: HashMap<&str, usize> =
        group_ids.iter().enumerate().map(|(i, g)| (*g, i)).collect();

    let mut sums: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); group_ids.len()];
    for (r, g) in groups.iter().enumerate() {
        let acc = &mut sums[group_idx[g]];
        for (c, v) in matrix.row(r) {
            *acc.entry(c).or_insert(0.0) += v;
        }
    }
    let triplets: Vec<(usize, usize, f64)> = sums
        .iter()
        .enumerate()
        .flat_map(|(g, row)| row.iter().map(move |(&c, &v)| (g, c, v)))
        .collect();
    let aggregated = BipartiteMatrix::from_triplets(
        group_ids.iter().map(|g| g.to_string()).collect(),
        matrix.col_ids().to_vec(),
        triplets,
    )?;
    match binarize {
        None => Ok(aggregated),
        Some(threshold) => aggregated.binarize(threshold).map_err(|e| match e {
            crate::matrix::MatrixError::EmptyRow(_) | crate::matrix::MatrixError::EmptyColumn(_) => {
                IngestError::AllPruned { threshold }
            }
            other => other.into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ipc::IpcCode;

    fn fam(id: &str, year: i32, apps: &[&str], codes: &[&str]) -> PatentFamilyRecord {
        PatentFamilyRecord {
            family_id: id.into(),
            year,
            applicants: apps.iter().map(|s| s.to_string()).collect(),
            tech_codes: codes.iter().map(|c| IpcCode::parse(c).unwrap()).collect(),
            triadic: true,
        }
    }

    fn worked_example() -> Vec<PatentFamilyRecord> {
        vec![
            fam("F1", 2011, &["a1", "a2"], &["A01B"]),
            fam("F2", 2011, &["a1", "a3"], &["A01B", "B60K"]),
        ]
    }

    #[test]
    fn fractional_counting() {
        let opts = BuildOptions {
            binarize: false,
            ..BuildOptions::new(2011)
        };
        let m = build_matrix(&worked_example(), &opts).unwrap();
        assert_eq!(m.row_ids(), &["a1", "a2", "a3"]);
        assert_eq!(m.col_ids(), &["A01B", "B60K"]);
        // oracle: F1 splits 1 over 2 pairs, F2 over 4 pairs
        assert_eq!(m.get(0, 0), 0.5 + 0.25);
        assert_eq!(m.get(0, 1), 0.25);
        assert_eq!(m.get(1, 0), 0.5);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.get(2, 0), 0.25);
        assert_eq!(m.get(2, 1), 0.25);
        assert!((m.row_sums().iter().sum::<f64>() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn binarized_worked_example() {
        let m = build_matrix(&worked_example(), &BuildOptions::new(2011)).unwrap();
        assert!(m.is_binary());
        assert_eq!(m.nnz(), 5);
        let high = BuildOptions {
            threshold: 0.3,
            ..BuildOptions::new(2011)
        };
        let m = build_matrix(&worked_example(), &high).unwrap();
        // only (a1,A01B)=3/4 and (a2,A01B)=1/2 survive
        assert_eq!(m.row_ids(), &["a1", "a2"]);
        assert_eq!(m.col_ids(), &["A01B"]);
        let all = BuildOptions {
            threshold: 1.0,
            ..BuildOptions::new(2011)
        };
        assert!(matches!(
            build_matrix(&worked_example(), &all),
            Err(IngestError::AllPruned { .. })
        ));
    }

    #[test]
    fn single_family() {
        let m = build_matrix(&[fam("F", 2000, &["x"], &["H04L"])], &BuildOptions {
            binarize: false,
            ..BuildOptions::new(2000)
        })
        .unwrap();
        assert_eq!(m.to_dense(), vec![vec![1.0]]);
    }

    #[test]
    fn year_and_triadic_filters() {
        let mut recs = worked_example();
        recs[1].triadic = false;
        assert!(matches!(
            build_matrix(&recs, &BuildOptions::new(1999)),
            Err(IngestError::EmptyYear { year: 1999 })
        ));
        let opts = BuildOptions {
            triadic_only: true,
            ..BuildOptions::new(2011)
        };
        let m = build_matrix(&recs, &opts).unwrap();
        assert_eq!(m.row_ids(), &["a1", "a2"]);
        assert_eq!(m.col_ids(), &["A01B"]);
    }

    #[test]
    fn truncation() {
        let recs = vec![fam("F", 1, &["a"], &["G06F1/16", "G06F3/01"])];
        let t = truncate_codes(&recs, 3).unwrap();
        assert_eq!(t[0].tech_codes.len(), 1);
        assert_eq!(t[0].tech_codes.iter().next().unwrap().as_str(), "G06F");
        let recs = vec![fam("F", 1, &["a"], &["G06F", "H04L"])];
        let t = truncate_codes(&recs, 1).unwrap();
        let codes: Vec<_> = t[0].tech_codes.iter().map(|c| c.as_str().to_string()).collect();
        assert_eq!(codes, vec!["G", "H"]);
        let mixed = vec![fam("F", 1, &["a"], &["G06F1/16", "H04L"])];
        assert_eq!(truncate_codes(&mixed, 4).unwrap(), mixed);
        assert!(truncate_codes(&mixed, 0).is_err());
        assert!(truncate_codes(&mixed, 5).is_err());
    }

    #[test]
    fn aggregation_union_and_unmapped() {
        let m = BipartiteMatrix::from_dense_with_ids(
            vec!["a".into(), "b".into()],
            vec!["t0".into(), "t1".into()],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let g: HashMap<String, String> =
            [("a", "IT"), ("b", "IT")].iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let agg = aggregate_rows(&m, &g, Some(0.0)).unwrap();
        assert_eq!(agg.row_ids(), &["IT"]);
        assert_eq!(agg.to_dense(), vec![vec![1.0, 1.0]]);
        let partial: HashMap<String, String> = [("a".to_string(), "IT".to_string())].into();
        assert!(matches!(aggregate_rows(&m, &partial, None), Err(IngestError::UnmappedRow(_))));
    }
}
