#![allow(dead_code)]

use coherence_kit::matrix::BipartiteMatrix;
use coherence_kit::RelatednessMatrix;
use proptest::prelude::*;

/// Make every row and column non-empty without changing the shape.
pub fn repair(mut m: Vec<Vec<u8>>) -> Vec<Vec<u8>> {
    let (f, t) = (m.len(), m[0].len());
    for r in 0..f {
        if m[r].iter().all(|&v| v == 0) {
            m[r][r % t] = 1;
        }
    }
    for c in 0..t {
        if m.iter().all(|row| row[c] == 0) {
            m[c % f][c] = 1;
        }
    }
    m
}

/// Random binary matrices with 1..=max_f rows and 1..=max_t columns, no
/// empty row or column.
pub fn binary(max_f: usize, max_t: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
    (1..=max_f, 1..=max_t)
        .prop_flat_map(|(f, t)| prop::collection::vec(prop::collection::vec(0u8..=1, t), f))
        .prop_map(repair)
}

pub fn to_matrix(m: &[Vec<u8>]) -> BipartiteMatrix {
    let rows: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|&v| f64::from(v)).collect()).collect();
    BipartiteMatrix::from_dense(&rows).unwrap()
}

pub fn rows_of(r: &RelatednessMatrix) -> Vec<Vec<f64>> {
    r.to_rows()
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| {
            assert_eq!(x.len(), y.len());
            x.iter().zip(y).map(|(p, q)| (p - q).abs())
        })
        .fold(0.0, f64::max)
}
