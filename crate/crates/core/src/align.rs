//! Aligning the labels of one clustering to a reference via an optimal
//! one-to-one assignment, plus the disagreement rate after alignment.
//!
//! Labels are arbitrary integers on both sides, so comparison starts from
//! the overlap matrix between the two label sets. The assignment maximizes
//! the total overlap of matched pairs; surplus labels on the candidate side
//! map to fresh labels that do not collide with the reference.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::Clustering;

/// 1 if `clustering` puts `vertex` in cluster `label`, else 0.
pub fn membership_indicator(clustering: &Clustering, vertex: usize, label: usize) -> Result<u8> {
    if vertex >= clustering.len() {
        return Err(Error::VertexOutOfRange { vertex, vertex_count: clustering.len() });
    }
    Ok(u8::from(clustering.label(vertex) == label))
}

/// Contingency counts between two clusterings of the same vertex set.
/// `counts[i][j]` is the number of vertices carrying `row_labels[i]` in the
/// first clustering and `col_labels[j]` in the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapMatrix {
    pub row_labels: Vec<usize>,
    pub col_labels: Vec<usize>,
    pub counts: Vec<Vec<u64>>,
}

impl OverlapMatrix {
    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let cols = self.col_labels.len();
        let mut sums = vec![0u64; cols];
        for row in &self.counts {
            for (j, &c) in row.iter().enumerate() {
                sums[j] += c;
            }
        }
        sums
    }
}

pub fn overlap_matrix(a: &Clustering, b: &Clustering) -> Result<OverlapMatrix> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { got: a.len(), expected: b.len() });
    }
    let row_labels = a.distinct_labels();
    let col_labels = b.distinct_labels();
    let row_index: BTreeMap<usize, usize> =
        row_labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let col_index: BTreeMap<usize, usize> =
        col_labels.iter().enumerate().map(|(j, &l)| (l, j)).collect();
    let mut counts = vec![vec![0u64; col_labels.len()]; row_labels.len()];
    for v in 0..a.len() {
        counts[row_index[&a.label(v)]][col_index[&b.label(v)]] += 1;
    }
    Ok(OverlapMatrix { row_labels, col_labels, counts })
}

/// Minimum-cost perfect assignment on a square cost matrix, by the
/// shortest-augmenting-path method with potentials. Returns the total cost
/// and the column picked for each row.
fn min_assignment(cost: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0, Vec::new());
    }
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // matched_row[j]: row on column j, 1-based
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        while j0 != 0 {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
        }
    }
    let mut row_to_col = vec![usize::MAX; n];
    let mut total = 0i64;
    for j in 1..=n {
        let i = matched_row[j];
        row_to_col[i - 1] = j - 1;
        total += cost[i - 1][j - 1];
    }
    (total, row_to_col)
}

/// Maximum total value of a perfect assignment restricted to the given
/// rows and columns (which must be equally many).
fn max_assignment_value(values: &[Vec<i64>], rows: &[usize], cols: &[usize]) -> i64 {
    debug_assert_eq!(rows.len(), cols.len());
    let cost: Vec<Vec<i64>> =
        rows.iter().map(|&r| cols.iter().map(|&c| -values[r][c]).collect()).collect();
    -min_assignment(&cost).0
}

/// Relabeling produced by [`align_labels`]: a total map from the candidate
/// clustering's labels onto reference labels (or fresh ones for surplus).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMapping {
    map: BTreeMap<usize, usize>,
}

impl LabelMapping {
    pub fn target(&self, label: usize) -> Option<usize> {
        self.map.get(&label).copied()
    }

    /// Pairs `(candidate label, target label)` in ascending candidate order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.map.iter().map(|(&a, &b)| (a, b)).collect()
    }
}

/// Relabels `candidate` to agree with `reference` as much as possible.
///
/// The mapping is one-to-one, maximizes the number of vertices whose new
/// label equals the reference label, and among maximizers prefers the
/// lexicographically smallest mapping (scanning candidate labels in
/// ascending order, smaller targets first, fresh labels last). When the
/// candidate has more clusters than the reference, leftover clusters get
/// fresh labels counting up from one past the largest reference label.
pub fn align_labels(
    candidate: &Clustering,
    reference: &Clustering,
) -> Result<(Clustering, LabelMapping)> {
    if candidate.len() != reference.len() {
        return Err(Error::LengthMismatch { got: candidate.len(), expected: reference.len() });
    }
    if candidate.is_empty() {
        return Ok((candidate.clone(), LabelMapping { map: BTreeMap::new() }));
    }

    let overlap = overlap_matrix(candidate, reference)?;
    let kc = overlap.row_labels.len();
    let kr = overlap.col_labels.len();
    let side = kc.max(kr);

    // Square value matrix padded with zero rows/columns. Columns >= kr are
    // placeholders standing for "map to a fresh label".
    let mut values = vec![vec![0i64; side]; side];
    for (row, counts) in values.iter_mut().zip(&overlap.counts) {
        for (cell, &count) in row.iter_mut().zip(counts) {
            *cell = count as i64;
        }
    }

    let all: Vec<usize> = (0..side).collect();
    let mut best_remaining = max_assignment_value(&values, &all, &all);
    let mut free_rows: Vec<usize> = all.clone();
    let mut free_cols: Vec<usize> = all.clone();
    let mut chosen = vec![usize::MAX; kc];

    // Fix one row at a time, trying targets in lexicographic preference
    // order and keeping only choices that still reach the optimum.
    for i in 0..kc {
        free_rows.retain(|&r| r != i);
        let mut fixed = None;
        for &j in &free_cols {
            let rest: Vec<usize> = free_cols.iter().copied().filter(|&c| c != j).collect();
            let rest_value = max_assignment_value(&values, &free_rows, &rest);
            if values[i][j] + rest_value == best_remaining {
                fixed = Some(j);
                best_remaining -= values[i][j];
                break;
            }
        }
        let j = fixed.expect("some column always completes an optimal assignment");
        chosen[i] = j;
        free_cols.retain(|&c| c != j);
    }

    let fresh_base = overlap.col_labels.iter().max().map_or(0, |&m| m + 1);
    let mut next_fresh = fresh_base;
    let mut map = BTreeMap::new();
    for (i, &j) in chosen.iter().enumerate() {
        let target = if j < kr {
            overlap.col_labels[j]
        } else {
            next_fresh += 1;
            next_fresh - 1
        };
        map.insert(overlap.row_labels[i], target);
    }

    let labels = candidate.labels().iter().map(|l| map[l]).collect();
    Ok((Clustering::new(labels), LabelMapping { map }))
}

/// Disagreements between an aligned clustering and the reference, as a
/// count and a fraction of the vertex set (0 for the empty clustering).
pub fn error_rate(aligned: &Clustering, reference: &Clustering) -> Result<(usize, f64)> {
    if aligned.len() != reference.len() {
        return Err(Error::LengthMismatch { got: aligned.len(), expected: reference.len() });
    }
    let count = aligned.labels().iter().zip(reference.labels()).filter(|(a, b)| a != b).count();
    let fraction = if aligned.is_empty() { 0.0 } else { count as f64 / aligned.len() as f64 };
    Ok((count, fraction))
}
