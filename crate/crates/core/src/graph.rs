//! Undirected weighted graphs over dense vertex ids, and the label
//! assignments produced by clustering them.

use std::collections::BTreeSet;
use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Undirected weighted graph over vertex ids `0..vertex_count`.
///
/// Each edge is stored once with `u < v`; adjacency lists are symmetric.
/// Self-loops, duplicate edges and non-positive weights are rejected at
/// construction, so downstream code can assume a simple graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize, f64)>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    /// Builds a graph from an edge list. Endpoint order within a pair does
    /// not matter; `(u, v, w)` and `(v, u, w)` denote the same edge and
    /// together count as a duplicate.
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for (u, v, w) in edges {
            if u >= vertex_count {
                return Err(Error::VertexOutOfRange { vertex: u, vertex_count });
            }
            if v >= vertex_count {
                return Err(Error::VertexOutOfRange { vertex: v, vertex_count });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::NonPositiveWeight { u, v, weight: w });
            }
            normalized.push((u.min(v), u.max(v), w));
        }
        normalized.sort_by_key(|&(u, v, _)| (u, v));
        for pair in normalized.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(Error::DuplicateEdge(pair[0].0, pair[0].1));
            }
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(u, v, w) in &normalized {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }
        Ok(Graph { vertex_count, edges: normalized, adjacency })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges normalized to `u < v` and sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Neighbors of `u` with edge weights, sorted by neighbor id.
    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adjacency[u]
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|&(_, _, w)| w).sum()
    }

    pub fn weighted_degree(&self, u: usize) -> f64 {
        self.adjacency[u].iter().map(|&(_, w)| w).sum()
    }

    /// Unweighted shortest-path (hop) distances from `source`.
    ///
    /// Unreachable vertices get the sentinel `vertex_count`, which exceeds
    /// any realizable path length (paths visit each vertex at most once).
    pub fn hop_distances(&self, source: usize) -> Result<Vec<usize>> {
        if source >= self.vertex_count {
            return Err(Error::VertexOutOfRange {
                vertex: source,
                vertex_count: self.vertex_count,
            });
        }
        let sentinel = self.vertex_count;
        let mut dist = vec![sentinel; self.vertex_count];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if dist[v] == sentinel {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// Connected components as sorted vertex lists, ordered by smallest
    /// member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.vertex_count];
        let mut components = Vec::new();
        for start in 0..self.vertex_count {
            if seen[start] {
                continue;
            }
            let mut component = vec![start];
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        component.push(v);
                        queue.push_back(v);
                    }
                }
            }
            component.sort_unstable();
            components.push(component);
        }
        components
    }

    /// Subgraph induced by `vertices`, keeping the original id space.
    /// The result has the same `vertex_count`; vertices outside the set
    /// simply become isolated.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<Graph> {
        let keep = self.check_vertex_set(vertices)?;
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v, _)| keep.contains(&u) && keep.contains(&v))
            .copied()
            .collect();
        Graph::new(self.vertex_count, edges)
    }

    /// Subgraph induced by `vertices`, compacted to ids `0..vertices.len()`.
    /// Returns the subgraph together with the map from compact id back to
    /// the original id (ascending, so compact order follows original order).
    pub fn compact_subgraph(&self, vertices: &[usize]) -> Result<(Graph, Vec<usize>)> {
        let keep = self.check_vertex_set(vertices)?;
        let to_original: Vec<usize> = keep.iter().copied().collect();
        let mut to_compact = vec![usize::MAX; self.vertex_count];
        for (compact, &original) in to_original.iter().enumerate() {
            to_compact[original] = compact;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v, _)| keep.contains(&u) && keep.contains(&v))
            .map(|&(u, v, w)| (to_compact[u], to_compact[v], w))
            .collect();
        Ok((Graph::new(to_original.len(), edges)?, to_original))
    }

    fn check_vertex_set(&self, vertices: &[usize]) -> Result<BTreeSet<usize>> {
        let mut set = BTreeSet::new();
        for &v in vertices {
            if v >= self.vertex_count {
                return Err(Error::VertexOutOfRange { vertex: v, vertex_count: self.vertex_count });
            }
            set.insert(v);
        }
        Ok(set)
    }
}

/// A hard assignment of every vertex `0..len` to a cluster label.
///
/// Labels are plain integers; they carry no meaning beyond equality, and
/// need not be contiguous. Use [`Clustering::canonicalized`] to compact
/// them to `0..k` in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    labels: Vec<usize>,
}

impl Clustering {
    pub fn new(labels: Vec<usize>) -> Self {
        Clustering { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, vertex: usize) -> usize {
        self.labels[vertex]
    }

    /// Distinct labels in ascending order.
    pub fn distinct_labels(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.labels.iter().copied().collect();
        set.into_iter().collect()
    }

    /// Number of distinct labels.
    pub fn cluster_count(&self) -> usize {
        self.labels.iter().collect::<BTreeSet<_>>().len()
    }

    /// Members of each cluster keyed by ascending label value.
    pub fn clusters(&self) -> Vec<(usize, Vec<usize>)> {
        let mut out: Vec<(usize, Vec<usize>)> =
            self.distinct_labels().into_iter().map(|l| (l, Vec::new())).collect();
        for (v, &l) in self.labels.iter().enumerate() {
            let slot = out.iter_mut().find(|(label, _)| *label == l).unwrap();
            slot.1.push(v);
        }
        out
    }

    /// Relabels to `0..k` in order of first appearance, which makes two
    /// clusterings comparable as partitions via plain equality.
    pub fn canonicalized(&self) -> Clustering {
        let mut next = 0usize;
        let mut map: Vec<(usize, usize)> = Vec::new();
        let mut labels = Vec::with_capacity(self.labels.len());
        for &l in &self.labels {
            let mapped = match map.iter().find(|(from, _)| *from == l) {
                Some(&(_, to)) => to,
                None => {
                    map.push((l, next));
                    next += 1;
                    next - 1
                }
            };
            labels.push(mapped);
        }
        Clustering { labels }
    }

    /// Restriction to `vertices`, in the order given.
    pub fn restricted_to(&self, vertices: &[usize]) -> Result<Clustering> {
        let mut labels = Vec::with_capacity(vertices.len());
        for &v in vertices {
            if v >= self.labels.len() {
                return Err(Error::VertexOutOfRange { vertex: v, vertex_count: self.labels.len() });
            }
            labels.push(self.labels[v]);
        }
        Ok(Clustering { labels })
    }
}
