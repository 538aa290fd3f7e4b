use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{AnalysisFrame, EconError, Variable};

/// Regressions on an [`AnalysisFrame`] need at least this many rows.
pub const MIN_REGRESSION_ROWS: usize = 30;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceType {
    #[default]
    Classical,
    /// White's estimator with the n/(n−p) small-sample scaling (HC1).
    Hc1,
}

impl std::str::FromStr for CovarianceType {
    type Err = EconError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "classical" => Ok(CovarianceType::Classical),
            "hc1" | "robust" => Ok(CovarianceType::Hc1),
            _ => Err(EconError::InvalidArgument(format!("unknown covariance type {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub coef: f64,
    pub se: f64,
    pub t: f64,
    pub p: f64,
}

impl Term {
    pub fn stars(&self) -> &'static str {
        stars(self.p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub response: String,
    pub intercept: Term,
    pub terms: Vec<Term>,
    pub r_squared: f64,
    pub n: usize,
    pub covariance: CovarianceType,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl RegressionResult {
    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

/// `***` below 0.01, `**` below 0.05, `*` below 0.1.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

/// Regress `response` on `regressors` (plus an intercept) over the frame.
pub fn ols(
    frame: &AnalysisFrame,
    response: Variable,
    regressors: &[Variable],
    covariance: CovarianceType,
) -> Result<RegressionResult, EconError> {
    if frame.len() < MIN_REGRESSION_ROWS {
        return Err(EconError::InsufficientData {
            n: frame.len(),
            params: regressors.len() + 1,
        });
    }
    let cols: Vec<(&str, &[f64])> = regressors
        .iter()
        .map(|&v| (v.label(), frame.column(v)))
        .collect();
    let mut r = ols_fit(frame.column(response), &cols, covariance)?;
    r.response = response.label().to_string();
    Ok(r)
}

/// Least squares with an intercept via Householder QR.
pub fn ols_fit(
    y: &[f64],
    regressors: &[(&str, &[f64])],
    covariance: CovarianceType,
) -> Result<RegressionResult, EconError> {
    let n = y.len();
    let p = regressors.len() + 1;
    if n <= p {
        return Err(EconError::InsufficientData { n, params: p });
    }
    if regressors.iter().any(|(_, c)| c.len() != n) {
        return Err(EconError::InvalidArgument("regressor length differs from response".into()));
    }
    if y.iter().chain(regressors.iter().flat_map(|(_, c)| c.iter())).any(|v| !v.is_finite()) {
        return Err(EconError::NonFinite("regression input".into()));
    }
    let x = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { regressors[j - 1].1[i] });
    let yv = DVector::from_column_slice(y);

    let qr = x.clone().qr();
    let r = qr.r();
    let max_diag = (0..p).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    let tol = max_diag * (n.max(p) as f64) * f64::EPSILON;
    if max_diag == 0.0 || (0..p).any(|j| r[(j, j)].abs() <= tol) {
        return Err(EconError::RankDeficient);
    }
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(EconError::RankDeficient)?;
    let resid = &yv - &x * &beta;

    // (XᵀX)⁻¹ = R⁻¹R⁻ᵀ
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(EconError::RankDeficient)?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let df = (n - p) as f64;
    let ssr = resid.norm_squared();
    let cov = match covariance {
        CovarianceType::Classical => &xtx_inv * (ssr / df),
        CovarianceType::Hc1 => {
            let mut meat = DMatrix::zeros(p, p);
            for i in 0..n {
                let row = x.row(i);
                meat += row.transpose() * row * (resid[i] * resid[i]);
            }
            &xtx_inv * meat * &xtx_inv * (n as f64 / df)
        }
    };

    let mean_y = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum();
    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else {
        1.0
    };

    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| EconError::InvalidArgument(e.to_string()))?;
    let term = |j: usize, name: &str| {
        let se = cov[(j, j)].max(0.0).sqrt();
        let t = beta[j] / se;
        let p = if t.is_finite() {
            (2.0 * dist.sf(t.abs())).min(1.0)
        } else if beta[j] == 0.0 {
            1.0
        } else {
            0.0
        };
        Term {
            name: name.to_string(),
            coef: beta[j],
            se,
            t,
            p,
        }
    };
    Ok(RegressionResult {
        response: "y".into(),
        intercept: term(0, "Intercept"),
        terms: regressors
            .iter()
            .enumerate()
            .map(|(k, (name, _))| term(k + 1, name))
            .collect(),
        r_squared,
        n,
        covariance,
        residuals: resid.iter().copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn perfect_fit() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let r = ols_fit(&y, &[("x", &x)], CovarianceType::Classical).unwrap();
        assert!((r.terms[0].coef - 2.0).abs() < 1e-12);
        assert_eq!(r.r_squared, 1.0);
    }

    #[test]
    fn independent_noise_has_small_slope() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10_000;
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let r = ols_fit(&y, &[("x", &x)], CovarianceType::Classical).unwrap();
        let t = &r.terms[0];
        assert!(t.coef.abs() < 3.0 * t.se);
        assert!(t.se > 0.0);
    }

    #[test]
    fn recovers_two_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 500;
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 0.5 + 3.0 * a[i] - b[i] + 1e-3 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let r = ols_fit(&y, &[("a", &a), ("b", &b)], CovarianceType::Classical).unwrap();
        assert!((r.terms[0].coef - 3.0).abs() < 1e-2);
        assert!((r.terms[1].coef + 1.0).abs() < 1e-2);
        assert!((r.intercept.coef - 0.5).abs() < 1e-2);
    }

    #[test]
    fn hc1_matches_hand_sandwich_for_single_regressor() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = [1.1, 1.9, 3.4, 3.9, 5.5, 5.8];
        let r = ols_fit(&y, &[("x", &x)], CovarianceType::Hc1).unwrap();
        // centred single-regressor form of the sandwich
        let n = x.len() as f64;
        let xm = x.iter().sum::<f64>() / n;
        let sxx: f64 = x.iter().map(|v| (v - xm) * (v - xm)).sum();
        let meat: f64 = x
            .iter()
            .zip(&r.residuals)
            .map(|(v, e)| (v - xm) * (v - xm) * e * e)
            .sum();
        let se = (meat / (sxx * sxx) * n / (n - 2.0)).sqrt();
        assert!((r.terms[0].se - se).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let x = [1.0, 2.0];
        assert!(matches!(
            ols_fit(&[1.0, 2.0], &[("x", &x)], CovarianceType::Classical),
            Err(EconError::InsufficientData { .. })
        ));
        let x = [1.0, 2.0, 3.0, 4.0];
        let x2 = [2.0, 4.0, 6.0, 8.0];
        assert!(matches!(
            ols_fit(&[1.0, 3.0, 2.0, 5.0], &[("a", &x), ("b", &x2)], CovarianceType::Classical),
            Err(EconError::RankDeficient)
        ));
    }

    #[test]
    fn star_thresholds() {
        assert_eq!(stars(0.005), "***");
        assert_eq!(stars(0.02), "**");
        assert_eq!(stars(0.07), "*");
        assert_eq!(stars(0.1), "");
    }
}
