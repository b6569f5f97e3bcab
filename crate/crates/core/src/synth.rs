//! Synthetic inputs: planted-partition random graphs and phased arrival
//! schedules derived from a finished graph.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Clustering, Graph};

/// Parameters for a planted-partition graph: `k` blocks of near-equal size
/// over `n` vertices, independent unit-weight edges with probability
/// `p_in` inside a block and `p_out` across blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub n: usize,
    pub k: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

impl PlantedConfig {
    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("planted partition needs k >= 1".into()));
        }
        for (name, p) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name}={p} is not a probability")));
            }
        }
        if self.p_out > self.p_in {
            return Err(Error::InvalidConfig(format!(
                "planted partition needs p_out <= p_in, got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        Ok(())
    }
}

/// Samples a planted-partition graph and returns it with the ground-truth
/// block assignment. Blocks are contiguous id ranges; when `k` does not
/// divide `n`, the first `n % k` blocks take the extra vertex, and blocks
/// past `n` stay empty. The same config always yields the same graph.
pub fn generate_planted_partition(config: &PlantedConfig) -> Result<(Graph, Clustering)> {
    config.validate()?;
    let (n, k) = (config.n, config.k);
    let base = n / k;
    let extra = n % k;
    let mut labels = Vec::with_capacity(n);
    for block in 0..k {
        let size = base + usize::from(block < extra);
        labels.extend(std::iter::repeat_n(block, size));
    }
    debug_assert_eq!(labels.len(), n);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if labels[u] == labels[v] { config.p_in } else { config.p_out };
            if rng.random::<f64>() < p {
                edges.push((u, v, 1.0));
            }
        }
    }
    Ok((Graph::new(n, edges)?, Clustering::new(labels)))
}

/// One growth step of a phased dataset: the vertices present so far and the
/// subgraph they induce. The graph keeps the full id space, so ids are
/// stable across phases; absent vertices are simply isolated.
#[derive(Debug, Clone)]
pub struct PhaseSnapshot {
    pub vertices: Vec<usize>,
    pub graph: Graph,
}

/// A graph revealed in cumulative phases, with the optional ground truth
/// carried along for scoring.
#[derive(Debug, Clone)]
pub struct PhasedDataset {
    pub phases: Vec<PhaseSnapshot>,
    pub truth: Option<Clustering>,
}

/// Splits `graph` into cumulative arrival phases. `fractions` must be
/// strictly increasing, each in (0, 1], ending at exactly 1.0; phase `i`
/// contains the first `ceil(fractions[i] * n)` vertices of one seeded
/// random permutation, so later phases always contain earlier ones.
pub fn generate_phased_dataset(
    graph: &Graph,
    truth: Option<&Clustering>,
    fractions: &[f64],
    seed: u64,
) -> Result<PhasedDataset> {
    if fractions.is_empty() {
        return Err(Error::InvalidConfig("need at least one phase fraction".into()));
    }
    let mut previous = 0.0;
    for &f in fractions {
        if !(f > previous && f <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "phase fractions must be strictly increasing in (0, 1], got {fractions:?}"
            )));
        }
        previous = f;
    }
    if *fractions.last().unwrap() != 1.0 {
        return Err(Error::InvalidConfig("last phase fraction must be exactly 1.0".into()));
    }
    if let Some(t) = truth {
        if t.len() != graph.vertex_count() {
            return Err(Error::LengthMismatch { got: t.len(), expected: graph.vertex_count() });
        }
    }

    let n = graph.vertex_count();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut phases = Vec::with_capacity(fractions.len());
    for &f in fractions {
        let count = ((f * n as f64).ceil() as usize).min(n);
        let mut vertices: Vec<usize> = order[..count].to_vec();
        vertices.sort_unstable();
        let snapshot = graph.induced_subgraph(&vertices)?;
        phases.push(PhaseSnapshot { vertices, graph: snapshot });
    }
    Ok(PhasedDataset { phases, truth: truth.cloned() })
}
