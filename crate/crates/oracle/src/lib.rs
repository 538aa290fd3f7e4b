//! Brute-force dense references for the relatedness and coherence
//! measures. Everything is written as direct loops over a 0/1 matrix
//! `m[f][t]`, with no sharing of code with the library under test.

pub type Dense = Vec<Vec<f64>>;

fn cols(m: &[Vec<u8>]) -> usize {
    m.first().map_or(0, |r| r.len())
}

pub fn ubiquity(m: &[Vec<u8>]) -> Vec<f64> {
    (0..cols(m))
        .map(|t| m.iter().filter(|r| r[t] == 1).count() as f64)
        .collect()
}

pub fn diversification(m: &[Vec<u8>]) -> Vec<f64> {
    m.iter().map(|r| r.iter().filter(|&&v| v == 1).count() as f64).collect()
}

/// J[a][b] = number of rows holding both a and b.
pub fn cooccurrence(m: &[Vec<u8>]) -> Dense {
    let t = cols(m);
    let mut j = vec![vec![0.0; t]; t];
    for a in 0..t {
        for b in 0..t {
            for row in m {
                if row[a] == 1 && row[b] == 1 {
                    j[a][b] += 1.0;
                }
            }
        }
    }
    j
}

/// Hypergeometric standardization of J; 0 on the diagonal and wherever
/// the null variance vanishes.
pub fn tau(m: &[Vec<u8>]) -> Dense {
    let t = cols(m);
    let f = m.len() as f64;
    let u = ubiquity(m);
    let j = cooccurrence(m);
    let mut out = vec![vec![0.0; t]; t];
    for a in 0..t {
        for b in 0..t {
            if a == b {
                continue;
            }
            // draws of size u[a] from f agents, u[b] of which are "successes"
            let mean = u[a] * u[b] / f;
            let var = if f > 1.0 {
                u[a] * (u[b] / f) * ((f - u[b]) / f) * ((f - u[a]) / (f - 1.0))
            } else {
                0.0
            };
            out[a][b] = if var > 0.0 { (j[a][b] - mean) / var.sqrt() } else { 0.0 };
        }
    }
    out
}

pub fn proximity(m: &[Vec<u8>]) -> Dense {
    let u = ubiquity(m);
    let j = cooccurrence(m);
    let t = u.len();
    let mut out = vec![vec![0.0; t]; t];
    for a in 0..t {
        for b in 0..t {
            let d = u[a].max(u[b]);
            out[a][b] = if d > 0.0 { j[a][b] / d } else { 0.0 };
        }
    }
    out
}

pub fn taxonomy(m: &[Vec<u8>]) -> Dense {
    let u = ubiquity(m);
    let d = diversification(m);
    let t = u.len();
    let mut out = vec![vec![0.0; t]; t];
    for a in 0..t {
        for b in 0..t {
            let mut s = 0.0;
            for (row, df) in m.iter().zip(&d) {
                if row[a] == 1 && row[b] == 1 {
                    s += 1.0 / df;
                }
            }
            let n = u[a].max(u[b]);
            out[a][b] = if n > 0.0 { s / n } else { 0.0 };
        }
    }
    out
}

pub fn gamma(m: &[Vec<u8>], b: &Dense) -> Dense {
    let t = cols(m);
    m.iter()
        .map(|row| {
            (0..t)
                .map(|i| (0..t).map(|k| b[i][k] * f64::from(row[k])).sum())
                .collect()
        })
        .collect()
}

pub fn coherent_diversification(m: &[Vec<u8>], b: &Dense) -> Vec<f64> {
    let g = gamma(m, b);
    m.iter()
        .zip(&g)
        .map(|(row, gr)| {
            let d: f64 = row.iter().map(|&v| f64::from(v)).sum();
            row.iter().zip(gr).map(|(&v, x)| f64::from(v) * x).sum::<f64>() / d
        })
        .collect()
}

/// WAR over a portfolio given as (tech index, share) pairs.
pub fn war(tau: &Dense, portfolio: &[(usize, f64)]) -> Vec<f64> {
    portfolio
        .iter()
        .map(|&(t, _)| {
            let (mut num, mut den) = (0.0, 0.0);
            for &(s, p) in portfolio {
                if s != t {
                    num += tau[t][s] * p;
                    den += p;
                }
            }
            num / den
        })
        .collect()
}

/// WARN: like [`war`] but only over neighbours in the maximum spanning
/// tree of the portfolio's τ submatrix, found by enumeration.
pub fn warn(tau: &Dense, portfolio: &[(usize, f64)]) -> Vec<f64> {
    let nodes: Vec<usize> = portfolio.iter().map(|p| p.0).collect();
    let tree = max_spanning_tree(tau, &nodes);
    portfolio
        .iter()
        .map(|&(t, _)| {
            let (mut num, mut den) = (0.0, 0.0);
            for &(s, p) in portfolio {
                if tree.contains(&(t.min(s), t.max(s))) {
                    num += tau[t][s] * p;
                    den += p;
                }
            }
            num / den
        })
        .collect()
}

pub fn coh(war: &[f64], portfolio: &[(usize, f64)]) -> f64 {
    let num: f64 = war.iter().zip(portfolio).map(|(w, p)| w * p.1).sum();
    let den: f64 = portfolio.iter().map(|p| p.1).sum();
    num / den
}

fn is_spanning_tree(n: usize, edges: &[(usize, usize)]) -> bool {
    // n-1 edges and connected
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &(a, b) in edges {
            let y = if a == x { b } else if b == x { a } else { continue };
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Every spanning tree of the complete graph on `n` nodes, as index pairs
/// (a < b) into 0..n.
pub fn all_spanning_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let k = n.saturating_sub(1);
    let mut out = Vec::new();
    let mut pick = Vec::new();
    fn rec(
        pairs: &[(usize, usize)],
        start: usize,
        k: usize,
        n: usize,
        pick: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if pick.len() == k {
            if is_spanning_tree(n, pick) {
                out.push(pick.clone());
            }
            return;
        }
        for i in start..pairs.len() {
            pick.push(pairs[i]);
            rec(pairs, i + 1, k, n, pick, out);
            pick.pop();
        }
    }
    if n > 0 {
        rec(&pairs, 0, k, n, &mut pick, &mut out);
    }
    out
}

/// Maximum-weight spanning tree over `nodes` (sorted ascending, so index
/// order is label order) by exhaustive enumeration. Among trees within
/// 1e-9 of the best weight, the one whose edges ranked by (weight desc,
/// smaller node, larger node) form the smallest sequence wins. Weights
/// within rounding of each other count as equal in the ranking.
pub fn max_spanning_tree(w: &Dense, nodes: &[usize]) -> Vec<(usize, usize)> {
    let n = nodes.len();
    let mut ranked: Vec<(usize, usize)> =
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    // Weights are compared on a 1e-9 grid so that entries equal up to
    // rounding rank as ties.
    let key = |e: &(usize, usize)| (w[nodes[e.0]][nodes[e.1]] * 1e9).round() as i64;
    ranked.sort_by(|x, y| key(y).cmp(&key(x)).then(x.cmp(y)));
    let rank = |e: &(usize, usize)| ranked.iter().position(|r| r == e).unwrap();
    let weight = |t: &[(usize, usize)]| t.iter().map(|&(a, b)| w[nodes[a]][nodes[b]]).sum::<f64>();
    let trees = all_spanning_trees(n);
    let best = trees.iter().map(|t| weight(t)).fold(f64::NEG_INFINITY, f64::max);
    let chosen = trees
        .iter()
        .filter(|t| weight(t) >= best - 1e-9)
        .min_by_key(|t| {
            let mut r: Vec<usize> = t.iter().map(rank).collect();
            r.sort_unstable();
            r
        })
        .cloned()
        .unwrap_or_default();
    chosen
        .into_iter()
        .map(|(a, b)| (nodes[a].min(nodes[b]), nodes[a].max(nodes[b])))
        .collect()
}

/// Best total weight over all spanning trees of the complete graph on
/// `nodes`.
pub fn max_spanning_weight(w: &Dense, nodes: &[usize]) -> f64 {
    all_spanning_trees(nodes.len())
        .iter()
        .map(|t| t.iter().map(|&(a, b)| w[nodes[a]][nodes[b]]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cayley_counts() {
        for (n, c) in [(1, 1), (2, 1), (3, 3), (4, 16), (5, 125)] {
            assert_eq!(all_spanning_trees(n).len(), c);
        }
    }

    #[test]
    fn two_firm_example() {
        let m = vec![vec![1, 1, 0], vec![1, 0, 1]];
        let b = taxonomy(&m);
        assert_eq!(b[0][0], 0.5);
        assert_eq!(b[0][1], 0.25);
        assert_eq!(cooccurrence(&m)[0][0], 2.0);
    }
}
