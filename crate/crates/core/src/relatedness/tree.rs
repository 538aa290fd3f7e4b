use std::cmp::Ordering;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{RelatednessError, RelatednessKind, RelatednessMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeMode {
    #[default]
    Max,
    Min,
}

impl FromStr for TreeMode {
    type Err = RelatednessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(TreeMode::Max),
            "min" => Ok(TreeMode::Min),
            _ => Err(RelatednessError::Parse(format!("unknown tree mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Spanning forest over the technologies of a relatedness matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    pub tech_ids: Vec<String>,
    pub edges: Vec<TreeEdge>,
    pub mode: TreeMode,
}

impl SpanningTree {
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Neighbour lists, index-aligned with `tech_ids`.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.tech_ids.len()];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        adj
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Kruskal over an explicit edge list. Ties are broken by the label pair
/// (smaller label first), so the result is independent of input order.
fn kruskal(labels: &[String], mut edges: Vec<TreeEdge>, mode: TreeMode) -> Vec<TreeEdge> {
    for e in edges.iter_mut() {
        if labels[e.b] < labels[e.a] {
            std::mem::swap(&mut e.a, &mut e.b);
        }
    }
    edges.sort_by(|x, y| {
        let by_weight = match mode {
            TreeMode::Max => y.weight.total_cmp(&x.weight),
            TreeMode::Min => x.weight.total_cmp(&y.weight),
        };
        by_weight
            .then_with(|| labels[x.a].cmp(&labels[y.a]))
            .then_with(|| labels[x.b].cmp(&labels[y.b]))
    });
    let mut sets = DisjointSet::new(labels.len());
    let mut tree = Vec::with_capacity(labels.len().saturating_sub(1));
    for e in edges {
        if sets.union(e.a, e.b) {
            tree.push(e);
        }
    }
    tree
}

/// Maximum spanning tree of the complete graph on `nodes` with weights
/// `weight(i, j)`; every pair is an edge whatever its sign.
pub fn max_spanning_forest(
    labels: &[String],
    weight: impl Fn(usize, usize) -> f64,
) -> Vec<TreeEdge> {
    let n = labels.len();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            edges.push(TreeEdge {
                a,
                b,
                weight: weight(a, b),
            });
        }
    }
    kruskal(labels, edges, TreeMode::Max)
}

/// Spanning forest of a relatedness network. Nonzero off-diagonal entries
/// are edges; for τ every pair is an edge since 0 is a legitimate value.
pub fn spanning_tree(r: &RelatednessMatrix, mode: TreeMode) -> Result<SpanningTree, RelatednessError> {
    if r.n() == 0 {
        return Err(RelatednessError::EmptyMatrix);
    }
    let mut edges = Vec::new();
    if r.kind() == RelatednessKind::Tau {
        for a in 0..r.n() {
            for b in a + 1..r.n() {
                edges.push(TreeEdge {
                    a,
                    b,
                    weight: r.get(a, b),
                });
            }
        }
    } else {
        for a in 0..r.n() {
            for (b, w) in r.row_nonzeros(a) {
                if b > a {
                    edges.push(TreeEdge { a, b, weight: w });
                }
            }
        }
    }
    Ok(SpanningTree {
        tech_ids: r.tech_ids().to_vec(),
        edges: kruskal(r.tech_ids(), edges, mode),
        mode,
    })
}
