use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{AnalysisFrame, EconError, Variable};

/// Quantile of sorted data by linear interpolation between order
/// statistics: h = (n−1)·q, x[⌊h⌋] + (h−⌊h⌋)·(x[⌊h⌋+1] − x[⌊h⌋]).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Mid-ranks scaled to (0,1): (r − 0.5)/n with ties sharing their average
/// rank.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j share their mean
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = (r - 0.5) / n as f64;
        }
        i = j;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub x_lo: f64,
    pub x_hi: f64,
    pub x_median: f64,
    pub count: usize,
    /// Indices into the input, in x order.
    #[serde(skip)]
    pub members: Vec<usize>,
    pub y_quantiles: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCurve {
    pub x_var: String,
    pub y_var: String,
    pub quantiles: Vec<f64>,
    pub bins: Vec<Bin>,
}

impl BinnedCurve {
    /// Bin edges: the smallest x of each bin followed by the overall maximum.
    pub fn edges(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.bins.iter().map(|b| b.x_lo).collect();
        if let Some(last) = self.bins.last() {
            e.push(last.x_hi);
        }
        e
    }

    /// Columns `bin,x_lo,x_hi,x_median,count,q<quantile>...`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["bin".to_string(), "x_lo".into(), "x_hi".into(), "x_median".into(), "count".into()];
        header.extend(self.quantiles.iter().map(|q| format!("q{q}")));
        w.write_record(&header)?;
        for (i, b) in self.bins.iter().enumerate() {
            let mut rec = vec![
                i.to_string(),
                b.x_lo.to_string(),
                b.x_hi.to_string(),
                b.x_median.to_string(),
                b.count.to_string(),
            ];
            rec.extend(b.y_quantiles.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Equal-count bins over the frame's `x_var`, with `quantiles` of `y_var`
/// inside each bin.
pub fn binned_quantiles(
    frame: &AnalysisFrame,
    x_var: Variable,
    y_var: Variable,
    n_bins: usize,
    quantiles: &[f64],
) -> Result<BinnedCurve, EconError> {
    let mut c = binned_quantiles_xy(frame.column(x_var), frame.column(y_var), n_bins, quantiles)?;
    c.x_var = x_var.name().into();
    c.y_var = y_var.name().into();
    Ok(c)
}

/// Points are sorted by x (ties by input position) and cut into `n_bins`
/// runs; the first n mod n_bins bins hold one extra point.
pub fn binned_quantiles_xy(
    x: &[f64],
    y: &[f64],
    n_bins: usize,
    quantiles: &[f64],
) -> Result<BinnedCurve, EconError> {
    if n_bins < 2 {
        return Err(EconError::InvalidArgument("at least two bins are required".into()));
    }
    if let Some(q) = quantiles.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
        return Err(EconError::InvalidArgument(format!("quantile {q} outside (0, 1)")));
    }
    if x.len() != y.len() {
        return Err(EconError::InvalidArgument("x and y lengths differ".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(EconError::NonFinite("binning input".into()));
    }
    let n = x.len();
    if n < n_bins {
        return Err(EconError::TooFewPoints { n, needed: n_bins });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let (base, extra) = (n / n_bins, n % n_bins);

    let make_bin = |members: &[usize]| {
        let xs: Vec<f64> = members.iter().map(|&i| x[i]).collect();
        let mut ys: Vec<f64> = members.iter().map(|&i| y[i]).collect();
        ys.sort_by(f64::total_cmp);
        Bin {
            x_lo: xs[0],
            x_hi: xs[xs.len() - 1],
            x_median: quantile_sorted(&xs, 0.5),
            count: members.len(),
            members: members.to_vec(),
            y_quantiles: quantiles.iter().map(|&q| quantile_sorted(&ys, q)).collect(),
        }
    };
    let mut ranges = Vec::with_capacity(n_bins);
    let mut start = 0;
    for b in 0..n_bins {
        let len = base + usize::from(b < extra);
        ranges.push(start..start + len);
        start += len;
    }
    #[cfg(feature = "parallel")]
    let bins = {
        use rayon::prelude::*;
        ranges.into_par_iter().map(|r| make_bin(&order[r])).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let bins = ranges.into_iter().map(|r| make_bin(&order[r])).collect();
    Ok(BinnedCurve {
        x_var: "x".into(),
        y_var: "y".into(),
        quantiles: quantiles.to_vec(),
        bins,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatCell {
    pub ix: usize,
    pub iy: usize,
    pub count: usize,
    /// Mean response rank of the members; None when the cell is below the
    /// minimum count.
    pub mean_rank: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatGrid {
    pub x_var: String,
    pub y_var: String,
    pub response: String,
    pub n_cells: usize,
    pub min_count: usize,
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// Row-major by y then x: cell (ix, iy) is at iy·n_cells + ix.
    pub cells: Vec<HeatCell>,
}

impl HeatGrid {
    pub fn cell(&self, ix: usize, iy: usize) -> &HeatCell {
        &self.cells[iy * self.n_cells + ix]
    }

    pub fn total_count(&self) -> usize {
        self.cells.iter().map(|c| c.count).sum()
    }

    /// Columns `ix,iy,x_lo,x_hi,y_lo,y_hi,count,mean_rank`; empty cells
    /// leave `mean_rank` blank.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ix", "iy", "x_lo", "x_hi", "y_lo", "y_hi", "count", "mean_rank"])?;
        for c in &self.cells {
            w.write_record([
                c.ix.to_string(),
                c.iy.to_string(),
                self.x_edges[c.ix].to_string(),
                self.x_edges[c.ix + 1].to_string(),
                self.y_edges[c.iy].to_string(),
                self.y_edges[c.iy + 1].to_string(),
                c.count.to_string(),
                c.mean_rank.map(|r| r.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn heat_grid(
    frame: &AnalysisFrame,
    x_var: Variable,
    y_var: Variable,
    response: Variable,
    n_cells: usize,
    min_count: usize,
) -> Result<HeatGrid, EconError> {
    let mut g = heat_grid_xy(
        frame.column(x_var),
        frame.column(y_var),
        frame.column(response),
        n_cells,
        min_count,
    )?;
    g.x_var = x_var.name().into();
    g.y_var = y_var.name().into();
    g.response = response.name().into();
    Ok(g)
}

fn edges(values: &[f64], n: usize) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..=n)
        .map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 })
        .collect()
}

fn cell_of(v: f64, e: &[f64]) -> usize {
    let n = e.len() - 1;
    let (lo, hi) = (e[0], e[n]);
    if hi <= lo {
        return 0;
    }
    (((v - lo) / (hi - lo) * n as f64).floor() as usize).min(n - 1)
}

/// n_cells × n_cells equal-width grid over the ranges of `x` and `y`. Each
/// cell holds its member count and the mean mid-rank of `response`, ranked
/// over all points.
pub fn heat_grid_xy(
    x: &[f64],
    y: &[f64],
    response: &[f64],
    n_cells: usize,
    min_count: usize,
) -> Result<HeatGrid, EconError> {
    if n_cells == 0 {
        return Err(EconError::InvalidArgument("grid needs at least one cell".into()));
    }
    if x.len() != y.len() || x.len() != response.len() {
        return Err(EconError::InvalidArgument("column lengths differ".into()));
    }
    if x.is_empty() {
        return Err(EconError::TooFewPoints { n: 0, needed: 1 });
    }
    if x.iter().chain(y).chain(response).any(|v| !v.is_finite()) {
        return Err(EconError::NonFinite("grid input".into()));
    }
    let x_edges = edges(x, n_cells);
    let y_edges = edges(y, n_cells);
    let ranks = midranks(response);
    let mut count = vec![0usize; n_cells * n_cells];
    let mut sum = vec![0.0; n_cells * n_cells];
    for i in 0..x.len() {
        let k = cell_of(y[i], &y_edges) * n_cells + cell_of(x[i], &x_edges);
        count[k] += 1;
        sum[k] += ranks[i];
    }
    let cells = (0..n_cells * n_cells)
        .map(|k| HeatCell {
            ix: k % n_cells,
            iy: k / n_cells,
            count: count[k],
            mean_rank: (count[k] > 0 && count[k] >= min_count).then(|| sum[k] / count[k] as f64),
        })
        .collect();
    Ok(HeatGrid {
        x_var: "x".into(),
        y_var: "y".into(),
        response: "response".into(),
        n_cells,
        min_count,
        x_edges,
        y_edges,
        cells,
    })
}
