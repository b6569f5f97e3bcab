//! Validity measures for clusterings of a graph (modularity, Dunn), the
//! consensus selection rule over a run-similarity matrix, and the combined
//! per-ensemble report.

use crate::align::{align_labels, error_rate};
use crate::error::{Error, Result};
use crate::graph::{Clustering, Graph};
use crate::metasim::SimilarityMatrix;
use crate::wgc::MetaClustering;

/// Edge-weight fractions between clusters: `e[i][j]` is the share of total
/// edge weight running between clusters `i` and `j`, with off-diagonal
/// mass split symmetrically so the whole matrix sums to 1. `a[i]` is the
/// row sum, the fraction of edge ends landing in cluster `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularityTerms {
    pub labels: Vec<usize>,
    pub e: Vec<Vec<f64>>,
    pub a: Vec<f64>,
}

pub fn modularity_terms(g: &Graph, c: &Clustering) -> Result<ModularityTerms> {
    if c.len() != g.vertex_count() {
        return Err(Error::LengthMismatch { got: c.len(), expected: g.vertex_count() });
    }
    if g.edge_count() == 0 {
        return Err(Error::EdgelessGraph);
    }
    let labels = c.distinct_labels();
    let index_of = |label: usize| labels.binary_search(&label).expect("label registry covers c");
    let k = labels.len();

    // Accumulate raw weight first and divide once at the end; this keeps
    // exact closed-form cases (one cluster, symmetric splits) exact.
    let mut within = vec![0.0f64; k];
    let mut across = vec![vec![0.0f64; k]; k];
    for &(u, v, w) in g.edges() {
        let (i, j) = (index_of(c.label(u)), index_of(c.label(v)));
        if i == j {
            within[i] += w;
        } else {
            across[i][j] += w;
            across[j][i] += w;
        }
    }
    let total = g.total_weight();
    let mut e = vec![vec![0.0f64; k]; k];
    let mut a = vec![0.0f64; k];
    for i in 0..k {
        e[i][i] = within[i] / total;
        let mut incident = 2.0 * within[i];
        for j in 0..k {
            if i != j {
                e[i][j] = across[i][j] / (2.0 * total);
                incident += across[i][j];
            }
        }
        a[i] = incident / (2.0 * total);
    }
    Ok(ModularityTerms { labels, e, a })
}

/// Newman's modularity: `Q = sum_i (e_ii - a_i^2)`.
pub fn modularity(g: &Graph, c: &Clustering) -> Result<f64> {
    let terms = modularity_terms(g, c)?;
    Ok(terms.e.iter().enumerate().map(|(i, row)| row[i] - terms.a[i] * terms.a[i]).sum())
}

/// Dunn index over hop distance: minimum distance between vertices of
/// different clusters divided by the largest intra-cluster diameter.
/// Unreachable pairs count as distance `n`, so splitting disconnected
/// pieces scores high. Needs at least two clusters and at least one
/// multi-vertex cluster.
pub fn dunn_index(g: &Graph, c: &Clustering) -> Result<f64> {
    if c.len() != g.vertex_count() {
        return Err(Error::LengthMismatch { got: c.len(), expected: g.vertex_count() });
    }
    let k = c.cluster_count();
    if k < 2 {
        return Err(Error::TooFewClusters(k));
    }
    let n = g.vertex_count();
    let mut min_between = usize::MAX;
    let mut max_within = 0usize;
    for u in 0..n {
        let dist = g.hop_distances(u)?;
        for (v, &d) in dist.iter().enumerate().skip(u + 1) {
            if c.label(u) == c.label(v) {
                max_within = max_within.max(d);
            } else {
                min_between = min_between.min(d);
            }
        }
    }
    if max_within == 0 {
        return Err(Error::NoIntraPairs);
    }
    debug_assert_ne!(min_between, usize::MAX, "k >= 2 guarantees a between pair");
    Ok(min_between as f64 / max_within as f64)
}

/// The consensus rule: take the largest group of mutually similar runs
/// (ties: larger internal similarity, then smaller first member) and
/// return its member with the greatest total similarity to the rest of
/// the group (ties: smaller index).
pub fn select_most_similar(cc: &SimilarityMatrix, mc: &MetaClustering) -> Result<usize> {
    if mc.group_count() == 0 {
        return Err(Error::BadPartition { expected: cc.size(), detail: "no groups".into() });
    }
    if mc.member_count() != cc.size() {
        return Err(Error::BadPartition {
            expected: cc.size(),
            detail: format!("meta-clustering covers {} members", mc.member_count()),
        });
    }

    let internal = |group: &[usize]| -> u64 {
        let mut sum = 0;
        for (idx, &i) in group.iter().enumerate() {
            for &j in &group[idx + 1..] {
                sum += cc.weight(i, j);
            }
        }
        sum
    };

    // Groups are ordered by smallest member, so strict improvement keeps
    // the earliest group on full ties.
    let mut best: Option<(&Vec<usize>, (usize, u64))> = None;
    for group in mc.groups() {
        let key = (group.len(), internal(group));
        match best {
            Some((_, best_key)) if best_key >= key => {}
            _ => best = Some((group, key)),
        }
    }
    let (group, _) = best.expect("at least one group");

    // Members ascend, so strict > keeps the smallest index on ties.
    let mut winner = group[0];
    let mut winner_sum = cc.similarity_to(winner, group);
    for &member in &group[1..] {
        let sum = cc.similarity_to(member, group);
        if sum > winner_sum {
            winner = member;
            winner_sum = sum;
        }
    }
    Ok(winner)
}

/// Per-run measures inside a [`ValidityReport`]. Dunn is absent when
/// undefined for that run (single cluster, or no multi-vertex cluster);
/// error fields are absent when no reference was supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeasures {
    pub run: usize,
    pub modularity: f64,
    pub dunn: Option<f64>,
    pub error_count: Option<usize>,
    pub error_fraction: Option<f64>,
}

/// Everything the pipeline reports about one ensemble: per-run measures,
/// the consensus pick, the run plain modularity would pick, and the
/// grouping that produced the consensus.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub runs: Vec<RunMeasures>,
    pub consensus: usize,
    pub best_modularity: usize,
    pub grouping: MetaClustering,
}

impl ValidityReport {
    pub fn group_sizes(&self) -> Vec<usize> {
        self.grouping.groups().iter().map(Vec::len).collect()
    }
}

/// Builds the report for an ensemble of runs over `g`.
///
/// Modularity errors (an edgeless graph) abort the report; an undefined
/// Dunn value only blanks that run's entry, since one degenerate run
/// should not hide the rest of the ensemble.
pub fn validity_report(
    g: &Graph,
    runs: &[Clustering],
    reference: Option<&Clustering>,
    cc: &SimilarityMatrix,
    mc: &MetaClustering,
) -> Result<ValidityReport> {
    if runs.is_empty() {
        return Err(Error::InvalidConfig("cannot report on an empty ensemble".into()));
    }
    if runs.len() != cc.size() {
        return Err(Error::LengthMismatch { got: cc.size(), expected: runs.len() });
    }

    let mut measures = Vec::with_capacity(runs.len());
    for (index, run) in runs.iter().enumerate() {
        let q = modularity(g, run)?;
        let dunn = match dunn_index(g, run) {
            Ok(value) => Some(value),
            Err(Error::TooFewClusters(_)) | Err(Error::NoIntraPairs) => None,
            Err(other) => return Err(other),
        };
        let (error_count, error_fraction) = match reference {
            Some(truth) => {
                let (aligned, _) = align_labels(run, truth)?;
                let (count, fraction) = error_rate(&aligned, truth)?;
                (Some(count), Some(fraction))
            }
            None => (None, None),
        };
        measures.push(RunMeasures { run: index, modularity: q, dunn, error_count, error_fraction });
    }

    let consensus = select_most_similar(cc, mc)?;
    let best_modularity = measures
        .iter()
        .max_by(|a, b| {
            a.modularity
                .partial_cmp(&b.modularity)
                .expect("modularity is finite")
                // max_by returns the last max; favor earlier runs on ties
                .then(b.run.cmp(&a.run))
        })
        .expect("ensemble is non-empty")
        .run;

    Ok(ValidityReport { runs: measures, consensus, best_modularity, grouping: mc.clone() })
}

/// Key-value text rendering: one block per run, one consensus block.
pub fn report_to_text(report: &ValidityReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("runs={}\n", report.runs.len()));
    for m in &report.runs {
        out.push_str(&format!("\n[run {}]\n", m.run));
        out.push_str(&format!("q={}\n", m.modularity));
        match m.dunn {
            Some(d) => out.push_str(&format!("dunn={d}\n")),
            None => out.push_str("dunn=undefined\n"),
        }
        if let (Some(count), Some(fraction)) = (m.error_count, m.error_fraction) {
            out.push_str(&format!("error_count={count}\n"));
            out.push_str(&format!("error_fraction={fraction}\n"));
        }
    }
    out.push_str("\n[consensus]\n");
    out.push_str(&format!("selected_run={}\n", report.consensus));
    out.push_str(&format!("best_modularity_run={}\n", report.best_modularity));
    out.push_str(&format!("group_count={}\n", report.grouping.group_count()));
    let sizes: Vec<String> = report.group_sizes().iter().map(usize::to_string).collect();
    out.push_str(&format!("group_sizes={}\n", sizes.join(",")));
    out.push_str(&format!("groups={}\n", report.grouping.summary()));
    out
}

/// CSV rendering of the per-run table; empty cells where a measure is
/// undefined or unavailable.
pub fn measures_to_csv(report: &ValidityReport) -> String {
    let mut out = String::from("run,q,dunn,error_count,error_fraction\n");
    for m in &report.runs {
        let dunn = m.dunn.map(|d| d.to_string()).unwrap_or_default();
        let count = m.error_count.map(|c| c.to_string()).unwrap_or_default();
        let fraction = m.error_fraction.map(|f| f.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{},{}\n", m.run, m.modularity, dunn, count, fraction));
    }
    out
}
