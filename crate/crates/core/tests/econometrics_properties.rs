use coherence_kit::coherence::{CoherenceTable, FirmCoherence};
use coherence_kit::econometrics::{
    binned_quantiles_xy, heat_grid_xy, make_frame, ols, ols_fit, CovarianceType, EconError,
    Transforms, Variable,
};
use coherence_kit::ingest::FirmFinancials;
use coherence_kit::relatedness::Aggregation;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn column(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, n)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mean(a: &[f64]) -> f64 {
    a.iter().sum::<f64>() / a.len() as f64
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn standardize(a: &[f64]) -> Vec<f64> {
    let m = mean(a);
    let sd = (a.iter().map(|x| (x - m).powi(2)).sum::<f64>() / a.len() as f64).sqrt();
    a.iter().map(|x| (x - m) / sd).collect()
}

fn regression_data() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (35usize..120).prop_flat_map(|n| (column(n), column(n), column(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn residuals_orthogonal_to_regressors((y, x1, x2) in regression_data()) {
        let Ok(r) = ols_fit(&y, &[("a", &x1), ("b", &x2)], CovarianceType::Classical) else {
            return Ok(());
        };
        let e = &r.residuals;
        let scale = y.iter().map(|v| v.abs()).fold(1.0, f64::max) * y.len() as f64;
        prop_assert!(e.iter().sum::<f64>().abs() / scale < 1e-8);
        prop_assert!(dot(e, &x1).abs() / (scale * 100.0) < 1e-8);
        prop_assert!(dot(e, &x2).abs() / (scale * 100.0) < 1e-8);

        let my = mean(&y);
        let sst: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
        let ssr: f64 = e.iter().map(|v| v * v).sum();
        prop_assert!((r.r_squared - (1.0 - ssr / sst)).abs() < 1e-10);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&r.r_squared));
    }

    #[test]
    fn standardized_slope_is_pearson((y, x, _) in regression_data()) {
        let (ys, xs) = (standardize(&y), standardize(&x));
        let r = ols_fit(&ys, &[("x", &xs)], CovarianceType::Classical).unwrap();
        prop_assert!((r.terms[0].coef - pearson(&x, &y)).abs() < 1e-10);
        prop_assert!(r.intercept.coef.abs() < 1e-10);
    }

    #[test]
    fn hc1_and_classical_share_coefficients((y, x1, x2) in regression_data()) {
        let regs = [("a", &x1[..]), ("b", &x2[..])];
        let (Ok(c), Ok(h)) = (
            ols_fit(&y, &regs, CovarianceType::Classical),
            ols_fit(&y, &regs, CovarianceType::Hc1),
        ) else {
            return Ok(());
        };
        for (a, b) in c.terms.iter().zip(&h.terms) {
            prop_assert_eq!(a.coef, b.coef);
            prop_assert!(b.se > 0.0 && b.p >= 0.0 && b.p <= 1.0);
        }
    }

    #[test]
    fn bins_partition_the_points(
        (x, y) in (10usize..300).prop_flat_map(|n| (column(n), column(n))),
        k in 2usize..10,
    ) {
        let n = x.len();
        let c = binned_quantiles_xy(&x, &y, k, &[0.25, 0.5, 0.75]).unwrap();
        prop_assert_eq!(c.bins.len(), k);
        let mut seen = vec![false; n];
        for b in &c.bins {
            prop_assert_eq!(b.count, b.members.len());
            for &i in &b.members {
                prop_assert!(!seen[i]);
                seen[i] = true;
                prop_assert!(x[i] >= b.x_lo && x[i] <= b.x_hi);
            }
            prop_assert!(b.y_quantiles.windows(2).all(|w| w[0] <= w[1]));
        }
        prop_assert!(seen.iter().all(|&s| s));
        let counts: Vec<usize> = c.bins.iter().map(|b| b.count).collect();
        prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        prop_assert!(c.bins.windows(2).all(|w| w[0].x_hi <= w[1].x_lo));
    }

    #[test]
    fn heat_grid_ignores_point_order(
        (x, y, z) in (5usize..200).prop_flat_map(|n| (column(n), column(n), column(n))),
        cells in 1usize..8,
        min_count in 0usize..4,
        seed in any::<u64>(),
    ) {
        let g = heat_grid_xy(&x, &y, &z, cells, min_count).unwrap();
        prop_assert_eq!(g.total_count(), x.len());

        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(&mut order[..], &mut rng);
        let pick = |v: &[f64]| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let h = heat_grid_xy(&pick(&x), &pick(&y), &pick(&z), cells, min_count).unwrap();
        prop_assert_eq!(&g.x_edges, &h.x_edges);
        prop_assert_eq!(&g.y_edges, &h.y_edges);
        for (a, b) in g.cells.iter().zip(&h.cells) {
            prop_assert_eq!(a.count, b.count);
            match (a.mean_rank, b.mean_rank) {
                (Some(p), Some(q)) => prop_assert!((p - q).abs() < 1e-12),
                (None, None) => {}
                _ => prop_assert!(false, "emptiness differs"),
            }
            prop_assert_eq!(a.mean_rank.is_some(), a.count > 0 && a.count >= min_count);
        }
    }
}

#[test]
fn independent_response_ranks_near_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 10_000;
    let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let z: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let g = heat_grid_xy(&x, &y, &z, 5, 50).unwrap();
    for c in &g.cells {
        let r = c.mean_rank.expect("every cell has ~400 points");
        // sd of a cell mean is about 0.29/20
        assert!((r - 0.5).abs() < 0.07, "cell ({}, {}) mean rank {r}", c.ix, c.iy);
    }
}

fn row(id: &str, d: usize, gamma: f64) -> FirmCoherence {
    FirmCoherence {
        firm_id: id.into(),
        diversification: d,
        gamma_total: gamma,
        gamma_row: None,
        war: None,
        warn: None,
        coh: None,
        flags: Vec::new(),
    }
}

fn fin(id: &str, va: f64, year: i32) -> FirmFinancials {
    FirmFinancials {
        firm_id: id.into(),
        value_added: va,
        employees: 10.0,
        total_assets: 1000.0,
        country: "AA".into(),
        year,
    }
}

#[test]
fn frame_is_an_inner_join() {
    let table = CoherenceTable {
        source_aggregation: Aggregation::Firm,
        tech_ids: vec!["A".into()],
        rows: vec![row("a", 1, 0.5), row("b", 2, 0.7), row("c", 3, 0.9)],
    };
    let fins = vec![fin("a", 100.0, 2010), fin("c", 300.0, 2010), fin("d", 50.0, 2010), fin("b", 1.0, 2011)];
    let (frame, report) = make_frame(&fins, &table, &Transforms::identity(), Some(2010)).unwrap();
    assert_eq!(frame.firm_ids, ["a", "c"]);
    assert_eq!(report.joined, 2);
    assert_eq!(report.missing_financials, ["b"]);
    assert_eq!(report.missing_coherence, ["d"]);
    assert_eq!(frame.column(Variable::Productivity), [10.0, 30.0]);
    assert_eq!(frame.column(Variable::Gamma), [0.5, 0.9]);

    // Every year pooled: b joins with its 2011 record.
    let (all, _) = make_frame(&fins, &table, &Transforms::identity(), None).unwrap();
    assert_eq!(all.len(), 3);
}

#[test]
fn frame_regression_needs_enough_rows() {
    let table = CoherenceTable {
        source_aggregation: Aggregation::Firm,
        tech_ids: vec!["A".into()],
        rows: (0..10).map(|i| row(&format!("f{i}"), i + 1, 0.1 * (i + 1) as f64)).collect(),
    };
    let fins: Vec<_> = (0..10).map(|i| fin(&format!("f{i}"), 10.0 + i as f64, 2010)).collect();
    let (frame, _) = make_frame(&fins, &table, &Transforms::identity(), Some(2010)).unwrap();
    let err = ols(&frame, Variable::Productivity, &[Variable::Gamma], CovarianceType::Classical);
    assert!(matches!(err, Err(EconError::InsufficientData { .. })));
}
