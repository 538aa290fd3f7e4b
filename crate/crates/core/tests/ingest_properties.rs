use std::collections::{BTreeSet, HashMap};

use coherence_kit::ingest::{aggregate_rows, build_matrix, truncate_codes, BuildOptions, PatentFamilyRecord};
use coherence_kit::ipc::IpcCode;
use proptest::prelude::*;

const CODES: [&str; 7] = [
    "A01B 1/00",
    "A01B 3/02",
    "A01C 7/00",
    "B60K 6/20",
    "H04L 9/32",
    "H04W 4/00",
    "G06F 17/30",
];

fn family() -> impl Strategy<Value = (BTreeSet<usize>, BTreeSet<usize>, bool, bool)> {
    (
        prop::collection::btree_set(0usize..5, 1..=3),
        prop::collection::btree_set(0usize..CODES.len(), 1..=4),
        any::<bool>(),
        any::<bool>(),
    )
}

fn records(raw: &[(BTreeSet<usize>, BTreeSet<usize>, bool, bool)]) -> Vec<PatentFamilyRecord> {
    raw.iter()
        .enumerate()
        .map(|(i, (apps, codes, late, triadic))| PatentFamilyRecord {
            family_id: format!("fam{i}"),
            year: if *late { 2001 } else { 2000 },
            applicants: apps.iter().map(|a| format!("a{a}")).collect(),
            tech_codes: codes.iter().map(|&c| IpcCode::parse(CODES[c]).unwrap()).collect(),
            triadic: *triadic,
        })
        .collect()
}

fn weighted(year: i32) -> BuildOptions {
    BuildOptions {
        binarize: false,
        ..BuildOptions::new(year)
    }
}

fn total(m: &coherence_kit::matrix::BipartiteMatrix) -> f64 {
    m.triplets().map(|(_, _, v)| v).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn every_family_contributes_unit_weight(raw in prop::collection::vec(family(), 1..12)) {
        let recs = records(&raw);
        for r in recs.iter().filter(|r| r.year == 2000) {
            let m = build_matrix(std::slice::from_ref(r), &weighted(2000)).unwrap();
            prop_assert!((total(&m) - 1.0).abs() < 1e-12);
        }
        let active = recs.iter().filter(|r| r.year == 2000).count();
        if active > 0 {
            let m = build_matrix(&recs, &weighted(2000)).unwrap();
            prop_assert!((total(&m) - active as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn record_order_does_not_matter(
        raw in prop::collection::vec(family(), 1..12),
        key in any::<u64>(),
    ) {
        let recs = records(&raw);
        prop_assume!(recs.iter().any(|r| r.year == 2000));
        let mut shuffled = recs.clone();
        shuffled.sort_by_key(|r| {
            let h = r.family_id.bytes().fold(key, |h, b| h.wrapping_mul(31).wrapping_add(b as u64));
            h.wrapping_mul(0x9E3779B97F4A7C15)
        });
        for opts in [weighted(2000), BuildOptions::new(2000)] {
            prop_assert_eq!(build_matrix(&recs, &opts).unwrap(), build_matrix(&shuffled, &opts).unwrap());
        }
    }

    #[test]
    fn aggregation_conserves_column_weight(
        raw in prop::collection::vec(family(), 1..12),
        groups in prop::collection::vec(0usize..3, 5),
    ) {
        let recs = records(&raw);
        prop_assume!(recs.iter().any(|r| r.year == 2000));
        let m = build_matrix(&recs, &weighted(2000)).unwrap();
        let map: HashMap<String, String> =
            (0..5).map(|a| (format!("a{a}"), format!("g{}", groups[a]))).collect();
        let g = aggregate_rows(&m, &map, None).unwrap();
        for (x, y) in m.col_sums().iter().zip(g.col_sums()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_is_idempotent(raw in prop::collection::vec(family(), 1..12), level in 1u8..=4) {
        let recs = records(&raw);
        let once = truncate_codes(&recs, level).unwrap();
        prop_assert_eq!(truncate_codes(&once, level).unwrap(), once);
    }
}
