//! Pairwise similarity between clusterings of one vertex set, and the
//! similarity matrix built from a whole ensemble of them.
//!
//! The similarity between two clusterings is the number of unordered
//! vertex pairs on which they agree: both put the pair together, or both
//! keep it apart. It ranges from 0 to `n*(n-1)/2` and is the unnormalized
//! numerator of the Rand index.

use std::borrow::Borrow;

use crate::align::overlap_matrix;
use crate::clusterer::Ensemble;
use crate::error::{Error, Result};
use crate::graph::{Clustering, Graph};

fn pairs2(x: u64) -> u64 {
    x * (x.saturating_sub(1)) / 2
}

/// Number of unordered vertex pairs the two clusterings agree on.
///
/// Computed from the overlap matrix via the pair-counting identity
/// `agreements = C(n,2) + 2*sum_ij C(m_ij,2) - sum_i C(a_i,2) - sum_j C(b_j,2)`
/// where `m` is the overlap matrix and `a`, `b` its marginals. This runs in
/// O(n + |a||b|) instead of touching all pairs.
pub fn pair_agreement(a: &Clustering, b: &Clustering) -> Result<u64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { got: a.len(), expected: b.len() });
    }
    let overlap = overlap_matrix(a, b)?;
    let n = a.len() as u64;
    let cells: u64 = overlap.counts.iter().flatten().map(|&c| pairs2(c)).sum();
    let rows: u64 = overlap.row_sums().iter().map(|&c| pairs2(c)).sum();
    let cols: u64 = overlap.col_sums().iter().map(|&c| pairs2(c)).sum();
    let agreements = pairs2(n) as i128 + 2 * cells as i128 - rows as i128 - cols as i128;
    debug_assert!(agreements >= 0);
    Ok(agreements as u64)
}

/// Symmetric similarity matrix over the runs of an ensemble, with a zero
/// diagonal. Entry `(i, j)` is [`pair_agreement`] between runs `i` and `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityMatrix {
    weights: Vec<Vec<u64>>,
}

impl SimilarityMatrix {
    pub fn new(weights: Vec<Vec<u64>>) -> Result<Self> {
        let m = weights.len();
        for (i, row) in weights.iter().enumerate() {
            if row.len() != m {
                return Err(Error::BadSimilarityMatrix(format!(
                    "row {i} has {} entries in a {m}x{m} matrix",
                    row.len()
                )));
            }
        }
        for (i, row) in weights.iter().enumerate() {
            if row[i] != 0 {
                return Err(Error::BadSimilarityMatrix(format!(
                    "diagonal entry ({i}, {i}) is {}",
                    row[i]
                )));
            }
            for (j, &w) in row.iter().enumerate() {
                if w != weights[j][i] {
                    return Err(Error::BadSimilarityMatrix(format!(
                        "entry ({i}, {j}) = {w} but ({j}, {i}) = {}",
                        weights[j][i]
                    )));
                }
            }
        }
        Ok(SimilarityMatrix { weights })
    }

    /// Builds the matrix for a list of clusterings over one vertex set.
    /// Accepts owned or borrowed clusterings.
    pub fn from_clusterings<T: Borrow<Clustering>>(runs: &[T]) -> Result<Self> {
        let runs: Vec<&Clustering> = runs.iter().map(Borrow::borrow).collect();
        if let Some(first) = runs.first() {
            for r in &runs {
                if r.len() != first.len() {
                    return Err(Error::LengthMismatch { got: r.len(), expected: first.len() });
                }
            }
        }
        let m = runs.len();
        let mut weights = vec![vec![0u64; m]; m];
        for i in 0..m {
            for j in (i + 1)..m {
                let s = pair_agreement(runs[i], runs[j])?;
                weights[i][j] = s;
                weights[j][i] = s;
            }
        }
        Ok(SimilarityMatrix { weights })
    }

    /// Number of runs the matrix covers.
    pub fn size(&self) -> usize {
        self.weights.len()
    }

    /// View as a weighted graph with one vertex per run, for cut-based
    /// grouping. Zero similarities become non-edges.
    pub fn to_graph(&self) -> Graph {
        let m = self.size();
        let mut edges = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                if self.weights[i][j] > 0 {
                    edges.push((i, j, self.weights[i][j] as f64));
                }
            }
        }
        Graph::new(m, edges).expect("matrix invariants rule out construction errors")
    }

    pub fn weight(&self, i: usize, j: usize) -> u64 {
        self.weights[i][j]
    }

    /// Sum of similarities from `run` to every run in `others`, skipping
    /// `run` itself if present.
    pub fn similarity_to(&self, run: usize, others: &[usize]) -> u64 {
        others.iter().filter(|&&o| o != run).map(|&o| self.weights[run][o]).sum()
    }

    /// Plain CSV: one row per line, no header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.weights {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Whether every off-diagonal similarity is the same; cut-based
    /// grouping cannot distinguish runs in that case.
    pub fn is_uniform(&self) -> bool {
        let m = self.size();
        let mut first = None;
        for i in 0..m {
            for j in (i + 1)..m {
                match first {
                    None => first = Some(self.weights[i][j]),
                    Some(w) if w != self.weights[i][j] => return false,
                    Some(_) => {}
                }
            }
        }
        true
    }

    pub fn from_csv(input: &str) -> Result<Self> {
        let mut weights = Vec::new();
        for (idx, raw) in input.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for cell in line.split(',') {
                let value: u64 = cell.trim().parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: format!("bad similarity value `{}`", cell.trim()),
                })?;
                row.push(value);
            }
            weights.push(row);
        }
        SimilarityMatrix::new(weights)
    }
}

/// Similarity matrix over the runs of an ensemble.
pub fn build_meta_graph(ensemble: &Ensemble) -> Result<SimilarityMatrix> {
    SimilarityMatrix::from_clusterings(&ensemble.clusterings())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// All-pairs reference implementation, quadratic on purpose.
    fn agreement_by_pairs(a: &Clustering, b: &Clustering) -> u64 {
        let n = a.len();
        let mut agree = 0;
        for u in 0..n {
            for v in (u + 1)..n {
                let together_a = a.label(u) == a.label(v);
                let together_b = b.label(u) == b.label(v);
                if together_a == together_b {
                    agree += 1;
                }
            }
        }
        agree
    }

    #[test]
    fn identical_clusterings_agree_on_all_pairs() {
        let c = Clustering::new(vec![0, 0, 1, 1, 2]);
        assert_eq!(pair_agreement(&c, &c).unwrap(), 10);
    }

    #[test]
    fn one_block_versus_singletons_agree_nowhere() {
        let a = Clustering::new(vec![0, 0, 0]);
        let b = Clustering::new(vec![0, 1, 2]);
        assert_eq!(pair_agreement(&a, &b).unwrap(), 0);
    }

    #[test]
    fn agreement_is_label_invariant_and_symmetric() {
        let a = Clustering::new(vec![0, 0, 1, 2, 1]);
        let b = Clustering::new(vec![5, 5, 9, 9, 7]);
        let relabeled = Clustering::new(a.labels().iter().map(|&l| l + 100).collect());
        assert_eq!(pair_agreement(&a, &b).unwrap(), pair_agreement(&relabeled, &b).unwrap());
        assert_eq!(pair_agreement(&a, &b).unwrap(), pair_agreement(&b, &a).unwrap());
    }

    #[test]
    fn identity_matches_pair_loop() {
        // A few fixed cases with uneven cluster sizes.
        let cases = [
            (vec![0, 1, 0, 2, 2, 1, 0], vec![1, 1, 0, 0, 2, 2, 2]),
            (vec![0, 0, 0, 0], vec![1, 2, 1, 2]),
            (vec![3, 3, 3], vec![3, 3, 3]),
            (vec![], vec![]),
        ];
        for (la, lb) in cases {
            let a = Clustering::new(la);
            let b = Clustering::new(lb);
            assert_eq!(pair_agreement(&a, &b).unwrap(), agreement_by_pairs(&a, &b));
        }
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let a = Clustering::new(vec![0, 1]);
        let b = Clustering::new(vec![0]);
        assert!(pair_agreement(&a, &b).is_err());
        assert!(SimilarityMatrix::from_clusterings(&[a, b]).is_err());
    }

    #[test]
    fn matrix_is_symmetric_with_zero_diagonal() {
        let runs = vec![
            Clustering::new(vec![0, 0, 1, 1]),
            Clustering::new(vec![0, 1, 1, 0]),
            Clustering::new(vec![0, 0, 0, 1]),
        ];
        let single = SimilarityMatrix::from_clusterings(&runs[..1]).unwrap();
        assert_eq!(single.size(), 1);
        assert_eq!(single.weight(0, 0), 0);

        let m = SimilarityMatrix::from_clusterings(&runs).unwrap();
        assert_eq!(m.size(), 3);
        for i in 0..3 {
            assert_eq!(m.weight(i, i), 0);
            for j in 0..3 {
                assert_eq!(m.weight(i, j), m.weight(j, i));
                if i != j {
                    assert_eq!(m.weight(i, j), pair_agreement(&runs[i], &runs[j]).unwrap());
                }
            }
        }
    }

    #[test]
    fn similarity_to_sums_row_entries() {
        let m = SimilarityMatrix::new(vec![vec![0, 3, 5], vec![3, 0, 7], vec![5, 7, 0]]).unwrap();
        assert_eq!(m.similarity_to(0, &[0, 1, 2]), 8);
        assert_eq!(m.similarity_to(2, &[0, 1]), 12);
    }

    #[test]
    fn constructor_rejects_asymmetry_and_diagonal() {
        assert!(SimilarityMatrix::new(vec![vec![0, 1], vec![2, 0]]).is_err());
        assert!(SimilarityMatrix::new(vec![vec![1, 2], vec![2, 0]]).is_err());
        assert!(SimilarityMatrix::new(vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let m = SimilarityMatrix::new(vec![vec![0, 3, 5], vec![3, 0, 7], vec![5, 7, 0]]).unwrap();
        let text = m.to_csv();
        assert_eq!(text, "0,3,5\n3,0,7\n5,7,0\n");
        assert_eq!(SimilarityMatrix::from_csv(&text).unwrap(), m);
    }
}
