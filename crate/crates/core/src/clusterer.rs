//! Stochastic clusterers and ensemble running.
//!
//! Two engines share one config: a hard-assignment EM fit of a two-level
//! planted-partition model (one edge probability inside classes, one
//! across), and seeded label propagation. Both are deterministic given
//! their seed, which is what makes ensembles reproducible.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Clustering, Graph};

/// Probabilities are clamped into this band so logarithms stay finite even
/// on degenerate inputs (edgeless graphs, complete graphs).
const PROB_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Hard EM on the two-probability planted-partition model.
    EmMixture,
    /// Weighted-majority label propagation.
    LabelPropagation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClustererConfig {
    pub algorithm: Algorithm,
    /// Number of classes the EM fit starts with; unused by propagation.
    pub k: usize,
    pub max_iterations: usize,
    /// EM stops once the log-likelihood gain of a sweep falls below this.
    pub tolerance: f64,
    pub seed: u64,
}

impl ClustererConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        ClustererConfig { algorithm, k: 2, max_iterations: 200, tolerance: 1e-6, seed: 0 }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Runs the configured engine once. The result carries canonical labels
/// `0..k` in order of first appearance.
pub fn cluster(graph: &Graph, config: &ClustererConfig) -> Result<Clustering> {
    config.validate()?;
    match config.algorithm {
        Algorithm::EmMixture => Ok(em_mixture_cluster_traced(graph, config)?.0),
        Algorithm::LabelPropagation => label_propagation(graph, config),
    }
}

/// Model state for the hard EM fit: class proportions plus one
/// within-class and one across-class edge probability.
struct MixtureParams {
    ln_pi: Vec<f64>,
    ln_p_in: f64,
    ln_q_in: f64, // ln(1 - p_in)
    ln_p_out: f64,
    ln_q_out: f64,
}

fn fit_params(graph: &Graph, labels: &[usize], k: usize) -> MixtureParams {
    let n = labels.len() as u64;
    let mut class_sizes = vec![0u64; k];
    for &l in labels {
        class_sizes[l] += 1;
    }
    let mut within_edges = 0u64;
    for &(u, v, _) in graph.edges() {
        if labels[u] == labels[v] {
            within_edges += 1;
        }
    }
    let within_pairs: u64 = class_sizes.iter().map(|&s| s * s.saturating_sub(1) / 2).sum();
    let across_pairs = n * n.saturating_sub(1) / 2 - within_pairs;
    let across_edges = graph.edge_count() as u64 - within_edges;

    let estimate = |edges: u64, pairs: u64| -> f64 {
        if pairs == 0 {
            // No such pairs exist, so the value never enters the likelihood;
            // anything finite works, 0.5 keeps it neutral.
            return 0.5;
        }
        (edges as f64 / pairs as f64).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
    };
    let p_in = estimate(within_edges, within_pairs);
    let p_out = estimate(across_edges, across_pairs);

    let ln_pi = class_sizes
        .iter()
        .map(|&s| if s == 0 { f64::NEG_INFINITY } else { (s as f64 / n as f64).ln() })
        .collect();
    MixtureParams {
        ln_pi,
        ln_p_in: p_in.ln(),
        ln_q_in: (1.0 - p_in).ln(),
        ln_p_out: p_out.ln(),
        ln_q_out: (1.0 - p_out).ln(),
    }
}

fn log_likelihood(graph: &Graph, labels: &[usize], params: &MixtureParams, k: usize) -> f64 {
    let n = labels.len() as u64;
    let mut class_sizes = vec![0u64; k];
    for &l in labels {
        class_sizes[l] += 1;
    }
    let mut within_edges = 0u64;
    for &(u, v, _) in graph.edges() {
        if labels[u] == labels[v] {
            within_edges += 1;
        }
    }
    let within_pairs: u64 = class_sizes.iter().map(|&s| s * s.saturating_sub(1) / 2).sum();
    let across_pairs = n * n.saturating_sub(1) / 2 - within_pairs;
    let across_edges = graph.edge_count() as u64 - within_edges;

    let mut ll = 0.0;
    for &s in &class_sizes {
        if s > 0 {
            ll += s as f64 * (s as f64 / n as f64).ln();
        }
    }
    ll += within_edges as f64 * params.ln_p_in;
    ll += (within_pairs - within_edges) as f64 * params.ln_q_in;
    ll += across_edges as f64 * params.ln_p_out;
    ll += (across_pairs - across_edges) as f64 * params.ln_q_out;
    ll
}

/// The parameter state the first reassignment sweep runs under: uniform
/// class proportions and a mildly assortative edge-probability pair. The
/// seeded random labeling carries no signal yet, so fitting to it would
/// start from a near-flat state where the proportion term drowns out the
/// structure and every vertex drifts into whichever class is largest. A
/// neutral assortative start lets the first sweep move on edges instead.
fn initial_params(k: usize) -> MixtureParams {
    let p_in: f64 = 0.7;
    let p_out: f64 = 0.3;
    MixtureParams {
        ln_pi: vec![(1.0 / k as f64).ln(); k],
        ln_p_in: p_in.ln(),
        ln_q_in: (1.0 - p_in).ln(),
        ln_p_out: p_out.ln(),
        ln_q_out: (1.0 - p_out).ln(),
    }
}

/// Hard EM: seeded uniform random labeling, then alternate reassignment
/// sweeps with parameter refits until the likelihood gain drops below the
/// tolerance or the iteration cap hits.
///
/// Reassignment walks vertices in ascending id order and applies each move
/// immediately. Each move maximizes that vertex's complete-data likelihood
/// contribution under the sweep's parameters. The trace records the
/// likelihood once per iteration, after the refit, at that iteration's own
/// fitted parameters. From the second iteration on the sweep ascends the
/// likelihood at fixed parameters and the refit ascends it over
/// parameters, so the trace never decreases.
pub fn em_mixture_cluster_traced(
    graph: &Graph,
    config: &ClustererConfig,
) -> Result<(Clustering, Vec<f64>)> {
    config.validate()?;
    let n = graph.vertex_count();
    let k = config.k;
    if n == 0 {
        return Ok((Clustering::new(Vec::new()), Vec::new()));
    }
    if k > n {
        return Err(Error::TooManyClasses { k, n });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let mut class_sizes = vec![0u64; k];
    for &l in &labels {
        class_sizes[l] += 1;
    }

    let mut params = initial_params(k);
    let mut trace: Vec<f64> = Vec::new();

    for _ in 0..config.max_iterations {
        // Reassignment sweep under fixed parameters.
        let mut changed = false;
        for x in 0..n {
            let mut neighbor_in_class = vec![0u64; k];
            let mut total_neighbors = 0u64;
            for &(y, _) in graph.neighbors(x) {
                neighbor_in_class[labels[y]] += 1;
                total_neighbors += 1;
            }
            let old = labels[x];
            let mut best = old;
            let mut best_score = f64::NEG_INFINITY;
            for c in 0..k {
                if params.ln_pi[c] == f64::NEG_INFINITY && c != old {
                    continue; // empty class, nothing can join it
                }
                let peers = class_sizes[c] - u64::from(c == old);
                let nb = neighbor_in_class[c];
                let score = params.ln_pi[c]
                    + nb as f64 * params.ln_p_in
                    + (peers - nb) as f64 * params.ln_q_in
                    + (total_neighbors - nb) as f64 * params.ln_p_out
                    + ((n as u64 - 1 - peers) - (total_neighbors - nb)) as f64 * params.ln_q_out;
                if score > best_score {
                    best_score = score;
                    best = c;
                }
            }
            if best != old {
                class_sizes[old] -= 1;
                class_sizes[best] += 1;
                labels[x] = best;
                changed = true;
            }
        }

        params = fit_params(graph, &labels, k);
        let ll = log_likelihood(graph, &labels, &params, k);
        let gain = trace.last().map(|prev| ll - prev);
        trace.push(ll);
        if !changed || matches!(gain, Some(g) if g < config.tolerance) {
            break;
        }
    }

    Ok((Clustering::new(labels).canonicalized(), trace))
}

/// Seeded label propagation with weighted-majority voting.
///
/// Every vertex starts in its own cluster. One random visiting order is
/// drawn up front and reused for every sweep; a vertex adopts the label
/// with the largest total edge weight among its neighbors, breaking ties
/// toward the smallest label. Stops on a sweep with no change or at the
/// iteration cap. Isolated vertices keep their own label throughout.
pub fn label_propagation(graph: &Graph, config: &ClustererConfig) -> Result<Clustering> {
    config.validate()?;
    let n = graph.vertex_count();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    order.shuffle(&mut rng);

    for _ in 0..config.max_iterations {
        let mut changed = false;
        for &x in &order {
            if graph.neighbors(x).is_empty() {
                continue;
            }
            let mut votes: std::collections::BTreeMap<usize, f64> =
                std::collections::BTreeMap::new();
            for &(y, w) in graph.neighbors(x) {
                *votes.entry(labels[y]).or_insert(0.0) += w;
            }
            // BTreeMap iterates labels ascending, so `>` keeps the smallest
            // label among equals.
            let mut best = labels[x];
            let mut best_weight = f64::NEG_INFINITY;
            for (&label, &weight) in &votes {
                if weight > best_weight {
                    best_weight = weight;
                    best = label;
                }
            }
            if best != labels[x] {
                labels[x] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(Clustering::new(labels).canonicalized())
}

/// One member of an ensemble: the clustering plus the exact config that
/// produced it, including the derived seed.
#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub clustering: Clustering,
    pub config: ClustererConfig,
}

/// A batch of clusterings of the same graph, produced by one base config
/// under per-run derived seeds.
#[derive(Debug, Clone)]
pub struct Ensemble {
    vertex_count: usize,
    runs: Vec<EnsembleRun>,
}

impl Ensemble {
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn runs(&self) -> &[EnsembleRun] {
        &self.runs
    }

    pub fn clusterings(&self) -> Vec<&Clustering> {
        self.runs.iter().map(|r| &r.clustering).collect()
    }
}

/// Derives the seed for run `index` from a base seed. This is the
/// SplitMix64 output mix applied to `base + index * golden-ratio-gamma`,
/// so consecutive indices land far apart and runs never share a stream.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn run_config(base: &ClustererConfig, base_seed: u64, index: usize) -> ClustererConfig {
    ClustererConfig { seed: mix_seed(base_seed, index as u64), ..base.clone() }
}

/// Runs the clusterer `count` times with seeds derived from `base_seed`.
pub fn run_ensemble(
    graph: &Graph,
    base: &ClustererConfig,
    count: usize,
    base_seed: u64,
) -> Result<Ensemble> {
    let runs = (0..count)
        .map(|i| {
            let config = run_config(base, base_seed, i);
            Ok(EnsembleRun { clustering: cluster(graph, &config)?, config })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble { vertex_count: graph.vertex_count(), runs })
}

/// Same as [`run_ensemble`] but fanned out across threads. Each run is
/// fully determined by its own derived seed, so the result is identical to
/// the sequential version.
pub fn run_ensemble_parallel(
    graph: &Graph,
    base: &ClustererConfig,
    count: usize,
    base_seed: u64,
) -> Result<Ensemble> {
    let runs = (0..count)
        .into_par_iter()
        .map(|i| {
            let config = run_config(base, base_seed, i);
            Ok(EnsembleRun { clustering: cluster(graph, &config)?, config })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble { vertex_count: graph.vertex_count(), runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cliques(size: usize) -> (Graph, Clustering) {
        let n = 2 * size;
        let mut edges = Vec::new();
        for block in 0..2 {
            let offset = block * size;
            for i in 0..size {
                for j in (i + 1)..size {
                    edges.push((offset + i, offset + j, 1.0));
                }
            }
        }
        let labels = (0..n).map(|v| v / size).collect();
        (Graph::new(n, edges).unwrap(), Clustering::new(labels))
    }

    fn em_config(seed: u64) -> ClustererConfig {
        ClustererConfig { seed, ..ClustererConfig::new(Algorithm::EmMixture) }
    }

    #[test]
    fn em_recovers_two_cliques_on_most_seeds() {
        let (g, truth) = two_cliques(5);
        let mut hits = 0;
        for seed in 0..10 {
            let c = cluster(&g, &em_config(seed)).unwrap();
            // Canonical labels make partition equality plain equality.
            if c.canonicalized() == truth.canonicalized() {
                hits += 1;
            }
        }
        assert!(hits >= 9, "recovered the planted split on only {hits}/10 seeds");
    }

    #[test]
    fn em_with_one_class_converges_immediately() {
        let (g, _) = two_cliques(4);
        let config = ClustererConfig { k: 1, ..em_config(3) };
        let (c, trace) = em_mixture_cluster_traced(&g, &config).unwrap();
        assert_eq!(c.cluster_count(), 1);
        assert_eq!(trace.len(), 1, "no move is possible, so one iteration settles it");
    }

    #[test]
    fn em_likelihood_never_decreases() {
        let (g, _) = two_cliques(8);
        for seed in 0..20 {
            let (_, trace) = em_mixture_cluster_traced(&g, &em_config(seed)).unwrap();
            for pair in trace.windows(2) {
                assert!(
                    pair[1] >= pair[0] - 1e-9,
                    "likelihood dropped from {} to {} (seed {seed})",
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn em_is_deterministic_per_seed() {
        let (g, _) = two_cliques(6);
        let a = cluster(&g, &em_config(33)).unwrap();
        let b = cluster(&g, &em_config(33)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn em_survives_edgeless_graph() {
        let g = Graph::new(5, vec![]).unwrap();
        let c = cluster(&g, &em_config(1)).unwrap();
        assert_eq!(c.len(), 5);
        assert!(c.cluster_count() <= 2);
    }

    #[test]
    fn em_rejects_more_classes_than_vertices() {
        let g = Graph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let config = ClustererConfig { k: 3, ..em_config(0) };
        assert!(matches!(cluster(&g, &config), Err(Error::TooManyClasses { k: 3, n: 2 })));
    }

    #[test]
    fn em_handles_empty_graph() {
        let g = Graph::new(0, vec![]).unwrap();
        let config = ClustererConfig { k: 1, ..em_config(0) };
        assert!(cluster(&g, &config).unwrap().is_empty());
    }

    #[test]
    fn lp_finds_components_of_disjoint_cliques() {
        let (g, truth) = two_cliques(5);
        let config = ClustererConfig::new(Algorithm::LabelPropagation);
        let c = cluster(&g, &config).unwrap();
        assert_eq!(c.canonicalized(), truth.canonicalized());
    }

    #[test]
    fn lp_is_deterministic_per_seed_and_isolated_vertices_stay_alone() {
        let g = Graph::new(5, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let config =
            ClustererConfig { seed: 9, ..ClustererConfig::new(Algorithm::LabelPropagation) };
        let a = cluster(&g, &config).unwrap();
        let b = cluster(&g, &config).unwrap();
        assert_eq!(a, b);
        // 3 and 4 have no neighbors, so they stay in singleton clusters.
        let clusters = a.clusters();
        assert!(clusters.iter().any(|(_, m)| m == &vec![3]));
        assert!(clusters.iter().any(|(_, m)| m == &vec![4]));
    }

    #[test]
    fn lp_leaves_edgeless_graph_as_singletons() {
        let g = Graph::new(4, vec![]).unwrap();
        let config = ClustererConfig::new(Algorithm::LabelPropagation);
        let c = cluster(&g, &config).unwrap();
        assert_eq!(c.cluster_count(), 4);
    }

    #[test]
    fn lp_tracks_planted_partition_closely_on_most_seeds() {
        let config = crate::synth::PlantedConfig { n: 100, k: 2, p_in: 0.4, p_out: 0.01, seed: 17 };
        let (g, truth) = crate::synth::generate_planted_partition(&config).unwrap();
        let mut hits = 0;
        for seed in 0..10 {
            let lp = ClustererConfig { seed, ..ClustererConfig::new(Algorithm::LabelPropagation) };
            let c = cluster(&g, &lp).unwrap();
            let (aligned, _) = crate::align::align_labels(&c, &truth).unwrap();
            let (_, fraction) = crate::align::error_rate(&aligned, &truth).unwrap();
            if fraction <= 0.05 {
                hits += 1;
            }
        }
        assert!(hits >= 8, "stayed within 5% of the planted truth on only {hits}/10 seeds");
    }

    #[test]
    fn lp_ties_go_to_smallest_label() {
        // Vertex 1 sees equal weight from both sides on the first visit of
        // a path; whatever the visiting order, ties resolve deterministically.
        let g = Graph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let config = ClustererConfig::new(Algorithm::LabelPropagation);
        let a = cluster(&g, &config).unwrap();
        assert_eq!(a.cluster_count(), 1);
    }

    #[test]
    fn labels_are_canonical() {
        let (g, _) = two_cliques(4);
        for algorithm in [Algorithm::EmMixture, Algorithm::LabelPropagation] {
            let config = ClustererConfig { seed: 5, ..ClustererConfig::new(algorithm) };
            let c = cluster(&g, &config).unwrap();
            let distinct = c.distinct_labels();
            assert_eq!(distinct, (0..distinct.len()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn mix_seed_spreads_consecutive_indices() {
        let seeds: Vec<u64> = (0..100).map(|i| mix_seed(42, i)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len(), "derived seeds collided");
        assert_ne!(mix_seed(42, 0), mix_seed(43, 0));
    }

    #[test]
    fn ensemble_runs_use_derived_seeds_and_vary() {
        let (g, _) = two_cliques(5);
        let base = em_config(7);
        let e = run_ensemble(&g, &base, 4, 123).unwrap();
        assert_eq!(e.len(), 4);
        assert_eq!(e.vertex_count(), 10);
        for (i, run) in e.runs().iter().enumerate() {
            assert_eq!(run.config.seed, mix_seed(123, i as u64));
        }
    }

    #[test]
    fn empty_ensemble_is_allowed() {
        let (g, _) = two_cliques(3);
        let e = run_ensemble(&g, &em_config(0), 0, 5).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.vertex_count(), 6);
    }

    #[test]
    fn rerunning_an_ensemble_reproduces_it() {
        let (g, _) = two_cliques(5);
        let base = em_config(0);
        let a = run_ensemble(&g, &base, 3, 77).unwrap();
        let b = run_ensemble(&g, &base, 3, 77).unwrap();
        for (x, y) in a.runs().iter().zip(b.runs()) {
            assert_eq!(x.clustering, y.clustering);
            assert_eq!(x.config, y.config);
        }
    }

    #[test]
    fn parallel_ensemble_matches_sequential() {
        let config = crate::synth::PlantedConfig { n: 40, k: 2, p_in: 0.7, p_out: 0.1, seed: 2 };
        let (g, _) = crate::synth::generate_planted_partition(&config).unwrap();
        for algorithm in [Algorithm::EmMixture, Algorithm::LabelPropagation] {
            let base = ClustererConfig { seed: 0, ..ClustererConfig::new(algorithm) };
            let sequential = run_ensemble(&g, &base, 8, 99).unwrap();
            let parallel = run_ensemble_parallel(&g, &base, 8, 99).unwrap();
            for (a, b) in sequential.runs().iter().zip(parallel.runs()) {
                assert_eq!(a.clustering, b.clustering);
                assert_eq!(a.config, b.config);
            }
        }
    }
}
