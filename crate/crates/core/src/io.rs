//! Text formats: whitespace-separated edge lists and `vertex,label` CSV
//! files for clusterings.
//!
//! Edge list grammar, one item per line:
//!   - blank lines and lines starting with `#` are ignored
//!   - an optional header `n <count>` pins the vertex count (needed for
//!     trailing isolated vertices or edgeless graphs)
//!   - `u v` is an edge of weight 1, `u v w` an edge of weight `w`
//!
//! The vertex count is the larger of the header value and `1 + max id`.

use crate::error::{Error, Result};
use crate::graph::{Clustering, Graph};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn parse_edge_list(input: &str) -> Result<Graph> {
    let mut header: Option<usize> = None;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut seen: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    let mut max_id: Option<usize> = None;

    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens[0] == "n" {
            if tokens.len() != 2 {
                return Err(parse_err(line_no, "vertex-count header must be `n <count>`"));
            }
            if header.is_some() {
                return Err(parse_err(line_no, "duplicate vertex-count header"));
            }
            let count: usize = tokens[1]
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad vertex count `{}`", tokens[1])))?;
            header = Some(count);
            continue;
        }
        if tokens.len() != 2 && tokens.len() != 3 {
            return Err(parse_err(line_no, format!("expected `u v [w]`, got `{line}`")));
        }
        let u: usize = tokens[0]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad vertex id `{}`", tokens[0])))?;
        let v: usize = tokens[1]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad vertex id `{}`", tokens[1])))?;
        let w: f64 = match tokens.get(2) {
            Some(raw_w) => raw_w
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad edge weight `{raw_w}`")))?,
            None => 1.0,
        };
        if u == v {
            return Err(parse_err(line_no, format!("self-loop at vertex {u}")));
        }
        if !w.is_finite() || w <= 0.0 {
            return Err(parse_err(line_no, format!("edge weight must be positive, got {w}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(parse_err(line_no, format!("duplicate edge {{{u}, {v}}}")));
        }
        max_id = Some(max_id.unwrap_or(0).max(u).max(v));
        edges.push((u, v, w));
    }

    let implied = max_id.map(|m| m + 1).unwrap_or(0);
    let vertex_count = header.unwrap_or(0).max(implied);
    Graph::new(vertex_count, edges)
}

/// Inverse of [`parse_edge_list`]. Always writes the vertex-count header so
/// isolated vertices survive a round trip; unit weights are left implicit.
pub fn serialize_edge_list(graph: &Graph) -> String {
    let mut out = String::new();
    out.push_str(&format!("n {}\n", graph.vertex_count()));
    for &(u, v, w) in graph.edges() {
        if w == 1.0 {
            out.push_str(&format!("{u} {v}\n"));
        } else {
            out.push_str(&format!("{u} {v} {w}\n"));
        }
    }
    out
}

/// Parses a `vertex,label` CSV. An optional literal `vertex,label` header
/// is allowed. The vertex column must cover `0..n` exactly once, in any
/// order; the result is indexed by vertex id.
pub fn parse_clustering(input: &str) -> Result<Clustering> {
    let mut rows: Vec<(usize, usize, usize)> = Vec::new();
    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(parse_err(line_no, format!("expected `vertex,label`, got `{line}`"))),
        };
        if rows.is_empty() && a == "vertex" && b == "label" {
            continue;
        }
        let vertex: usize =
            a.parse().map_err(|_| parse_err(line_no, format!("bad vertex id `{a}`")))?;
        let label: usize = b.parse().map_err(|_| parse_err(line_no, format!("bad label `{b}`")))?;
        rows.push((vertex, label, line_no));
    }

    let n = rows.len();
    let mut labels = vec![usize::MAX; n];
    let mut filled = vec![false; n];
    for (vertex, label, line_no) in rows {
        if vertex >= n {
            return Err(parse_err(
                line_no,
                format!("vertex {vertex} out of range for a file with {n} rows"),
            ));
        }
        if filled[vertex] {
            return Err(parse_err(line_no, format!("vertex {vertex} listed twice")));
        }
        filled[vertex] = true;
        labels[vertex] = label;
    }
    Ok(Clustering::new(labels))
}

pub fn serialize_clustering(clustering: &Clustering) -> String {
    let mut out = String::from("vertex,label\n");
    for (v, &l) in clustering.labels().iter().enumerate() {
        out.push_str(&format!("{v},{l}\n"));
    }
    out
}
