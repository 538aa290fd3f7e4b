//! The three-firm, eleven-technology example with its hand-given
//! relatedness matrix.

use std::collections::BTreeSet;

use super::synthetic_code;
use crate::ingest::PatentFamilyRecord;
use crate::relatedness::{Aggregation, RelatednessKind, RelatednessMatrix};

pub const TOY_FIRMS: [&str; 3] = ["x", "y", "z"];

pub const TOY_M: [[u8; 11]; 3] = [
    [1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1],
    [1, 1, 1, 0, 0, 0, 0, 0, 1, 1, 0],
];

const TOY_B: [[u8; 11]; 11] = [
    [1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 1, 1, 0, 1, 0, 0, 0, 0, 0, 0],
    [1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 1, 0, 1, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0],
    [0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 1, 1, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1],
    [0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1],
    [0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1],
];

/// One single-code family per owned technology, so the built matrix is
/// exactly [`TOY_M`].
pub fn toy_records(year: i32) -> Vec<PatentFamilyRecord> {
    let mut out = Vec::new();
    for (firm, row) in TOY_FIRMS.iter().zip(TOY_M) {
        for (t, _) in row.iter().enumerate().filter(|(_, v)| **v == 1) {
            out.push(PatentFamilyRecord {
                family_id: format!("{firm}-{t:02}"),
                year,
                applicants: BTreeSet::from([firm.to_string()]),
                tech_codes: BTreeSet::from([synthetic_code(t)]),
                triadic: true,
            });
        }
    }
    out
}

/// The binary relatedness matrix given with the example, over the same
/// codes as [`toy_records`].
pub fn toy_taxonomy() -> RelatednessMatrix {
    let ids = (0..11).map(|t| synthetic_code(t).as_str().to_string()).collect();
    let data = TOY_B.iter().flatten().map(|&v| f64::from(v)).collect();
    RelatednessMatrix::from_dense(ids, RelatednessKind::Taxonomy, Aggregation::Firm, data)
}
