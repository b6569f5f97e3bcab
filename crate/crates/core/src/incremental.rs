//! Gradual-arrival clustering: cluster the first batch of vertices with a
//! full clusterer, then attach later arrivals to existing clusters without
//! ever relabeling old vertices.

use std::collections::BTreeMap;

use crate::clusterer::{cluster, ClustererConfig};
use crate::error::{Error, Result};
use crate::graph::{Clustering, Graph};
use crate::synth::PhasedDataset;
use crate::validity::modularity;

/// How an arriving vertex picks its cluster. Either way, a vertex with no
/// labeled neighbor opens a fresh singleton cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttachmentPolicy {
    /// Label with the largest total edge weight to the vertex (ties:
    /// smallest label).
    WeightedMajority,
    /// Label whose adoption maximizes modularity of the labeled subgraph
    /// (ties: smallest label).
    BestModularityGain,
}

/// Picks a label for `vertex` given the labels assigned so far. Existing
/// labels are read-only; the return value is the label `vertex` should
/// take. `labels` maps vertex id to label for every already-placed vertex.
pub fn attach_vertex(
    snapshot: &Graph,
    labels: &BTreeMap<usize, usize>,
    vertex: usize,
    policy: AttachmentPolicy,
) -> Result<usize> {
    if vertex >= snapshot.vertex_count() {
        return Err(Error::NotInSnapshot(vertex));
    }
    if labels.contains_key(&vertex) {
        return Err(Error::AlreadyLabeled(vertex));
    }

    let labeled_neighbors: Vec<(usize, f64)> = snapshot
        .neighbors(vertex)
        .iter()
        .filter(|(y, _)| labels.contains_key(y))
        .map(|&(y, w)| (labels[&y], w))
        .collect();
    if labeled_neighbors.is_empty() {
        let fresh = labels.values().max().map_or(0, |&m| m + 1);
        return Ok(fresh);
    }

    match policy {
        AttachmentPolicy::WeightedMajority => {
            let mut votes: BTreeMap<usize, f64> = BTreeMap::new();
            for (label, w) in labeled_neighbors {
                *votes.entry(label).or_insert(0.0) += w;
            }
            // Ascending label order plus strict > puts ties on the
            // smallest label.
            let mut best = usize::MAX;
            let mut best_weight = f64::NEG_INFINITY;
            for (&label, &weight) in &votes {
                if weight > best_weight {
                    best_weight = weight;
                    best = label;
                }
            }
            Ok(best)
        }
        AttachmentPolicy::BestModularityGain => {
            let mut members: Vec<usize> = labels.keys().copied().collect();
            members.push(vertex);
            members.sort_unstable();
            let (sub, back) = snapshot.compact_subgraph(&members)?;
            let slot = back.iter().position(|&v| v == vertex).expect("vertex is a member");

            let mut candidates: Vec<usize> = labels.values().copied().collect();
            candidates.sort_unstable();
            candidates.dedup();

            let base_labels: Vec<usize> =
                back.iter().map(|&orig| labels.get(&orig).copied().unwrap_or(0)).collect();
            let mut best = usize::MAX;
            let mut best_q = f64::NEG_INFINITY;
            for &candidate in &candidates {
                let mut trial = base_labels.clone();
                trial[slot] = candidate;
                // The labeled neighbor guarantees at least one edge here.
                let q = modularity(&sub, &Clustering::new(trial))?;
                if q > best_q {
                    best_q = q;
                    best = candidate;
                }
            }
            Ok(best)
        }
    }
}

/// State of one phase after attachment: the vertices known so far (sorted)
/// with their labels, and validity snapshots of the induced subgraph.
/// Modularity is absent when the phase subgraph has no edges; the error
/// fields are absent without ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord {
    pub phase: usize,
    pub vertices: Vec<usize>,
    pub labels: Vec<usize>,
    pub modularity: Option<f64>,
    pub error_count: Option<usize>,
    pub error_fraction: Option<f64>,
}

impl PhaseRecord {
    /// Labeling restricted to this phase's vertices, in `vertices` order.
    pub fn clustering(&self) -> Clustering {
        Clustering::new(self.labels.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrace {
    pub records: Vec<PhaseRecord>,
}

impl PhaseTrace {
    /// The final labeling as a full clustering, when the last phase covers
    /// every vertex of the underlying graph.
    pub fn final_clustering(&self) -> Option<Clustering> {
        let last = self.records.last()?;
        let n = last.vertices.len();
        if last.vertices.iter().copied().eq(0..n) {
            Some(Clustering::new(last.labels.clone()))
        } else {
            None
        }
    }

    /// CSV rows `phase,vertex,label`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase,vertex,label\n");
        for record in &self.records {
            for (&v, &l) in record.vertices.iter().zip(&record.labels) {
                out.push_str(&format!("{},{},{}\n", record.phase, v, l));
            }
        }
        out
    }

    /// CSV rows `phase,n,q,error_fraction` (blank cells when undefined).
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("phase,n,q,error_fraction\n");
        for record in &self.records {
            let q = record.modularity.map(|q| q.to_string()).unwrap_or_default();
            let err = record.error_fraction.map(|e| e.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", record.phase, record.vertices.len(), q, err));
        }
        out
    }
}

/// Clusters the first phase with `base`, then attaches each later arrival
/// in ascending id order under `policy`. Labels, once assigned, never
/// change; phase `i+1` restricted to phase `i`'s vertices equals phase
/// `i`'s labeling by construction.
pub fn run_phased(
    ds: &PhasedDataset,
    base: &ClustererConfig,
    policy: AttachmentPolicy,
) -> Result<PhaseTrace> {
    if ds.phases.is_empty() {
        return Err(Error::InvalidConfig("phased dataset has no phases".into()));
    }

    let mut labels: BTreeMap<usize, usize> = BTreeMap::new();
    let first = &ds.phases[0];
    let (sub, back) = first.graph.compact_subgraph(&first.vertices)?;
    let seeded = cluster(&sub, base)?;
    for (compact, &original) in back.iter().enumerate() {
        labels.insert(original, seeded.label(compact));
    }

    let mut records = Vec::with_capacity(ds.phases.len());
    record_phase(&mut records, 0, &ds.phases[0].graph, &labels, &ds.phases[0].vertices, ds)?;

    for (index, phase) in ds.phases.iter().enumerate().skip(1) {
        for &v in &phase.vertices {
            if labels.contains_key(&v) {
                continue;
            }
            let label = attach_vertex(&phase.graph, &labels, v, policy)?;
            labels.insert(v, label);
        }
        record_phase(&mut records, index, &phase.graph, &labels, &phase.vertices, ds)?;
    }
    Ok(PhaseTrace { records })
}

fn record_phase(
    records: &mut Vec<PhaseRecord>,
    phase: usize,
    snapshot: &Graph,
    labels: &BTreeMap<usize, usize>,
    vertices: &[usize],
    ds: &PhasedDataset,
) -> Result<()> {
    let phase_labels: Vec<usize> = vertices.iter().map(|v| labels[v]).collect();
    let clustering = Clustering::new(phase_labels.clone());

    let q = if vertices.is_empty() {
        None
    } else {
        let (sub, _) = snapshot.compact_subgraph(vertices)?;
        match modularity(&sub, &clustering) {
            Ok(q) => Some(q),
            Err(Error::EdgelessGraph) => None,
            Err(other) => return Err(other),
        }
    };

    let (error_count, error_fraction) = match &ds.truth {
        Some(truth) => {
            let truth_here = truth.restricted_to(vertices)?;
            let (aligned, _) = crate::align::align_labels(&clustering, &truth_here)?;
            let (count, fraction) = crate::align::error_rate(&aligned, &truth_here)?;
            (Some(count), Some(fraction))
        }
        None => (None, None),
    };

    records.push(PhaseRecord {
        phase,
        vertices: vertices.to_vec(),
        labels: phase_labels,
        modularity: q,
        error_count,
        error_fraction,
    });
    Ok(())
}
