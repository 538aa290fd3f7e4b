use std::fmt::Write as _;
use std::str::FromStr;

use super::{Aggregation, RelatednessError, RelatednessKind, RelatednessMatrix, SpanningTree, TreeEdge};
use crate::ipc::section_of;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkFormat {
    /// `source,target,weight` lines, no header.
    EdgeList,
    /// Square CSV with a header row of codes.
    Adjacency,
    GraphMl,
}

impl FromStr for NetworkFormat {
    type Err = RelatednessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "edge-list" | "edgelist" | "edges" => Ok(NetworkFormat::EdgeList),
            "adjacency" | "adjacency-csv" => Ok(NetworkFormat::Adjacency),
            "graphml" | "xml" => Ok(NetworkFormat::GraphMl),
            _ => Err(RelatednessError::UnsupportedFormat(s.to_string())),
        }
    }
}

/// Serialize a relatedness matrix. Edge lists and GraphML carry the
/// nonzero upper triangle (diagonal excluded); adjacency CSV is complete.
pub fn export_matrix(r: &RelatednessMatrix, format: NetworkFormat) -> Vec<u8> {
    match format {
        NetworkFormat::Adjacency => adjacency(r),
        NetworkFormat::EdgeList => edge_list(r.tech_ids(), &upper_edges(r)),
        NetworkFormat::GraphMl => graphml(r.tech_ids(), &upper_edges(r), r.kind().name()),
    }
}

pub fn export_tree(tree: &SpanningTree, format: NetworkFormat) -> Vec<u8> {
    match format {
        NetworkFormat::EdgeList => edge_list(&tree.tech_ids, &tree.edges),
        NetworkFormat::GraphMl => graphml(&tree.tech_ids, &tree.edges, "spanning_tree"),
        NetworkFormat::Adjacency => {
            let n = tree.tech_ids.len();
            let mut d = vec![0.0; n * n];
            for e in &tree.edges {
                d[e.a * n + e.b] = e.weight;
                d[e.b * n + e.a] = e.weight;
            }
            adjacency(&RelatednessMatrix::from_dense(
                tree.tech_ids.clone(),
                RelatednessKind::Taxonomy,
                Aggregation::Firm,
                d,
            ))
        }
    }
}

fn upper_edges(r: &RelatednessMatrix) -> Vec<TreeEdge> {
    (0..r.n())
        .flat_map(|a| {
            r.row_nonzeros(a)
                .into_iter()
                .filter(move |(b, _)| *b > a)
                .map(move |(b, weight)| TreeEdge { a, b, weight })
        })
        .collect()
}

fn edge_list(ids: &[String], edges: &[TreeEdge]) -> Vec<u8> {
    let mut out = String::new();
    for e in edges {
        let _ = writeln!(out, "{},{},{}", ids[e.a], ids[e.b], e.weight);
    }
    out.into_bytes()
}

fn adjacency(r: &RelatednessMatrix) -> Vec<u8> {
    let mut out = String::from("code");
    for id in r.tech_ids() {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for i in 0..r.n() {
        out.push_str(&r.tech_ids()[i]);
        for j in 0..r.n() {
            let _ = write!(out, ",{}", r.get(i, j));
        }
        out.push('\n');
    }
    out.into_bytes()
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn graphml(ids: &[String], edges: &[TreeEdge], name: &str) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"section\" for=\"node\" attr.name=\"section\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    let _ = writeln!(out, "  <graph id=\"{}\" edgedefault=\"undirected\">", xml_escape(name));
    for id in ids {
        let _ = writeln!(
            out,
            "    <node id=\"{}\"><data key=\"section\">{}</data></node>",
            xml_escape(id),
            section_of(id)
        );
    }
    for e in edges {
        let _ = writeln!(
            out,
            "    <edge source=\"{}\" target=\"{}\"><data key=\"weight\">{}</data></edge>",
            xml_escape(&ids[e.a]),
            xml_escape(&ids[e.b]),
            e.weight
        );
    }
    out.push_str("  </graph>\n</graphml>\n");
    out.into_bytes()
}

/// Parse the adjacency CSV written by [`export_matrix`].
pub fn import_adjacency(
    data: &[u8],
    kind: RelatednessKind,
    source: Aggregation,
) -> Result<RelatednessMatrix, RelatednessError> {
    let text = std::str::from_utf8(data).map_err(|e| RelatednessError::Parse(e.to_string()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| RelatednessError::Parse("empty input".into()))?;
    let ids: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
    let n = ids.len();
    let mut data = Vec::with_capacity(n * n);
    for (i, line) in lines.enumerate() {
        let mut cells = line.split(',');
        let label = cells.next().unwrap_or_default();
        if ids.get(i).map(String::as_str) != Some(label) {
            return Err(RelatednessError::Parse(format!("row {i} label {label:?} does not match header")));
        }
        let row = cells
            .map(|c| c.parse::<f64>().map_err(|e| RelatednessError::Parse(format!("{c:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != n {
            return Err(RelatednessError::Parse(format!("row {i} has {} values, expected {n}", row.len())));
        }
        data.extend(row);
    }
    if data.len() != n * n {
        return Err(RelatednessError::Parse("adjacency matrix is not square".into()));
    }
    Ok(RelatednessMatrix::from_dense(ids, kind, source, data))
}

/// Parse an edge list into `(source, target, weight)` triples.
pub fn import_edge_list(data: &[u8]) -> Result<Vec<(String, String, f64)>, RelatednessError> {
    let text = std::str::from_utf8(data).map_err(|e| RelatednessError::Parse(e.to_string()))?;
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|line| {
            let parts: Vec<&str> = line.split(',').collect();
            match parts.as_slice() {
                [a, b, w] => w
                    .parse()
                    .map(|w| (a.to_string(), b.to_string(), w))
                    .map_err(|e| RelatednessError::Parse(format!("{line:?}: {e}"))),
                _ => Err(RelatednessError::Parse(format!("bad edge line {line:?}"))),
            }
        })
        .collect()
}
