//! Relating coherent diversification to labor productivity: the analysis
//! frame, least squares with classical or robust errors, binned quantile
//! curves and 2D rank grids.

mod binning;
mod frame;
mod ols;
mod report;

pub use binning::{
    binned_quantiles, binned_quantiles_xy, heat_grid, heat_grid_xy, midranks, quantile_sorted, Bin,
    BinnedCurve, HeatCell, HeatGrid,
};
pub use frame::{make_frame, AnalysisFrame, FrameReport, Transform, Transforms, Variable};
pub use ols::{
    ols, ols_fit, stars, CovarianceType, RegressionResult, Term, MIN_REGRESSION_ROWS,
};
pub use report::{format_table, table_specs, TableSpec};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconError {
    #[error("join of financials and coherence table is empty")]
    EmptyJoin,
    #[error("non-finite values after transforming {0}")]
    NonFinite(String),
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("{n} observations are not enough for {params} parameters")]
    InsufficientData { n: usize, params: usize },
    #[error("{n} points are too few (need at least {needed})")]
    TooFewPoints { n: usize, needed: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
