//! Global minimum cuts and recursive cut-based grouping of weighted
//! graphs. Built for the run-similarity matrix, where each vertex is one
//! clustering run, but works on any weighted graph.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// A global minimum cut: its weight and the smaller side (ties broken
/// toward the side containing vertex 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub weight: f64,
    pub side: Vec<usize>,
}

/// Global minimum-weight cut by the Stoer–Wagner procedure.
///
/// Deterministic: each maximum-adjacency phase starts from the smallest
/// active vertex and breaks attachment ties toward smaller ids. A
/// disconnected graph short-circuits to a zero-weight cut that peels off
/// the smallest connected component.
pub fn min_cut(g: &Graph) -> Result<Cut> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(Error::CutTooSmall);
    }

    let components = g.connected_components();
    if components.len() > 1 {
        let side =
            components.iter().min_by_key(|c| (c.len(), c[0])).expect("n >= 2 components").clone();
        return Ok(Cut { weight: 0.0, side: orient_side(side, n) });
    }

    let mut adj = vec![vec![0.0f64; n]; n];
    for &(u, v, w) in g.edges() {
        adj[u][v] = w;
        adj[v][u] = w;
    }
    // merged[v]: original vertices contracted into active vertex v.
    let mut merged: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut best_weight = f64::INFINITY;
    let mut best_side: Vec<usize> = Vec::new();

    while active.len() > 1 {
        let start = active[0];
        let mut in_order = vec![false; n];
        in_order[start] = true;
        let mut attach = vec![0.0f64; n];
        for &v in &active {
            attach[v] = adj[start][v];
        }
        let mut prev = start;
        let mut last = start;
        let mut cut_of_phase = 0.0;
        for _ in 1..active.len() {
            let mut next = usize::MAX;
            let mut next_w = f64::NEG_INFINITY;
            for &v in &active {
                // active ascends, so strict > keeps the smallest id on ties
                if !in_order[v] && attach[v] > next_w {
                    next_w = attach[v];
                    next = v;
                }
            }
            in_order[next] = true;
            prev = last;
            last = next;
            cut_of_phase = next_w;
            for &v in &active {
                if !in_order[v] {
                    attach[v] += adj[next][v];
                }
            }
        }
        // The cut of the phase separates everything merged into `last`
        // from the rest; strict < keeps the earliest minimum.
        if cut_of_phase < best_weight {
            best_weight = cut_of_phase;
            best_side = merged[last].clone();
        }
        let absorbed = std::mem::take(&mut merged[last]);
        merged[prev].extend(absorbed);
        for &v in &active {
            if v != last && v != prev {
                adj[prev][v] += adj[last][v];
                adj[v][prev] = adj[prev][v];
            }
        }
        adj[prev][last] = 0.0;
        adj[last][prev] = 0.0;
        active.retain(|&v| v != last);
    }

    best_side.sort_unstable();
    Ok(Cut { weight: best_weight, side: orient_side(best_side, n) })
}

/// Applies the smaller-side convention, falling back to the side holding
/// vertex 0 on a size tie.
fn orient_side(side: Vec<usize>, n: usize) -> Vec<usize> {
    let mut in_side = vec![false; n];
    for &v in &side {
        in_side[v] = true;
    }
    let complement: Vec<usize> = (0..n).filter(|&v| !in_side[v]).collect();
    if side.len() < complement.len() {
        side
    } else if complement.len() < side.len() {
        complement
    } else if in_side[0] {
        side
    } else {
        complement
    }
}

/// A partition of `0..m` into non-empty groups, sorted members inside
/// groups and groups ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaClustering {
    groups: Vec<Vec<usize>>,
}

impl MetaClustering {
    /// Validates that `groups` partitions `0..expected` and normalizes the
    /// ordering.
    pub fn new(groups: Vec<Vec<usize>>, expected: usize) -> Result<Self> {
        let mut seen = vec![false; expected];
        let mut total = 0usize;
        for group in &groups {
            if group.is_empty() {
                return Err(Error::BadPartition { expected, detail: "empty group".into() });
            }
            for &v in group {
                if v >= expected {
                    return Err(Error::BadPartition {
                        expected,
                        detail: format!("member {v} out of range"),
                    });
                }
                if seen[v] {
                    return Err(Error::BadPartition {
                        expected,
                        detail: format!("member {v} appears twice"),
                    });
                }
                seen[v] = true;
                total += 1;
            }
        }
        if total != expected {
            return Err(Error::BadPartition {
                expected,
                detail: format!("covers {total} of {expected} members"),
            });
        }
        let mut groups: Vec<Vec<usize>> = groups
            .into_iter()
            .map(|mut g| {
                g.sort_unstable();
                g
            })
            .collect();
        groups.sort_by_key(|g| g[0]);
        Ok(MetaClustering { groups })
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn member_count(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn group_of(&self, member: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&member))
    }

    /// CSV lines `group_id,member_id`, groups in order, members ascending.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (id, group) in self.groups.iter().enumerate() {
            for &member in group {
                out.push_str(&format!("{id},{member}\n"));
            }
        }
        out
    }

    /// One-line rendering like `{0 3} {1} {2 4}` for reports.
    pub fn summary(&self) -> String {
        let parts: Vec<String> = self
            .groups
            .iter()
            .map(|g| {
                let items: Vec<String> = g.iter().map(usize::to_string).collect();
                format!("{{{}}}", items.join(" "))
            })
            .collect();
        parts.join(" ")
    }
}

/// When to stop splitting in [`wgc_cluster`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Split until exactly this many groups exist.
    TargetGroups(usize),
    /// Split while some group's relative cut value is at most this.
    Threshold(f64),
}

struct GroupState {
    members: Vec<usize>,
    internal_weight: f64,
    cut: Option<Cut>,
}

impl GroupState {
    fn build(g: &Graph, members: Vec<usize>) -> Result<Self> {
        let mut inside = vec![false; g.vertex_count()];
        for &v in &members {
            inside[v] = true;
        }
        let internal_weight =
            g.edges().iter().filter(|&&(u, v, _)| inside[u] && inside[v]).map(|&(_, _, w)| w).sum();
        let cut = if members.len() >= 2 {
            let (sub, back) = g.compact_subgraph(&members)?;
            let local = min_cut(&sub)?;
            let side = local.side.iter().map(|&v| back[v]).collect();
            Some(Cut { weight: local.weight, side })
        } else {
            None
        };
        Ok(GroupState { members, internal_weight, cut })
    }

    /// Ordering key for picking the next split. Zero internal weight means
    /// the group is held together by nothing, so it splits first.
    fn split_priority(&self) -> f64 {
        let cut = self.cut.as_ref().expect("only multi-member groups are split candidates");
        if self.internal_weight == 0.0 {
            0.0
        } else {
            cut.weight / self.internal_weight
        }
    }

    /// Relative cut value for the threshold stop: cut weight over internal
    /// weight, with single vertices and zero internal weight pinned to 1.
    fn relative_value(&self) -> f64 {
        match &self.cut {
            None => 1.0,
            Some(cut) => {
                if self.internal_weight == 0.0 {
                    1.0
                } else {
                    cut.weight / self.internal_weight
                }
            }
        }
    }
}

/// Recursive bisection of `g` by cheapest relative cut.
///
/// Each step picks the group whose minimum cut is cheapest relative to its
/// internal weight (ties toward the group with the smallest member) and
/// splits it along that cut. `TargetGroups` stops at the requested count;
/// `Threshold` stops once every group's relative cut value exceeds the
/// threshold.
pub fn wgc_cluster(g: &Graph, stop: StopRule) -> Result<MetaClustering> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::InvalidConfig("cannot group an empty graph".into()));
    }
    match stop {
        StopRule::TargetGroups(t) => {
            if t < 1 || t > n {
                return Err(Error::InvalidConfig(format!(
                    "target_groups must lie in [1, {n}], got {t}"
                )));
            }
        }
        StopRule::Threshold(x) => {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "threshold must be finite and non-negative, got {x}"
                )));
            }
        }
    }

    let mut groups = vec![GroupState::build(g, (0..n).collect())?];
    loop {
        let splittable = |s: &GroupState| match stop {
            StopRule::TargetGroups(_) => s.members.len() >= 2,
            StopRule::Threshold(x) => s.members.len() >= 2 && s.relative_value() <= x,
        };
        if let StopRule::TargetGroups(t) = stop {
            if groups.len() >= t {
                break;
            }
        }
        let candidate = groups
            .iter()
            .enumerate()
            .filter(|(_, s)| splittable(s))
            .min_by(|(_, a), (_, b)| {
                a.split_priority()
                    .partial_cmp(&b.split_priority())
                    .expect("priorities are finite")
                    .then(a.members[0].cmp(&b.members[0]))
            })
            .map(|(i, _)| i);
        let Some(index) = candidate else {
            match stop {
                // target mode always has a multi-member group while below
                // target, because target_groups <= n
                StopRule::TargetGroups(_) => unreachable!("ran out of splittable groups"),
                StopRule::Threshold(_) => break,
            }
        };

        let state = groups.swap_remove(index);
        let cut = state.cut.expect("split candidates have a cut");
        let side: Vec<usize> = cut.side;
        let rest: Vec<usize> =
            state.members.iter().copied().filter(|v| !side.contains(v)).collect();
        groups.push(GroupState::build(g, side)?);
        groups.push(GroupState::build(g, rest)?);
    }

    MetaClustering::new(groups.into_iter().map(|s| s.members).collect(), n)
}
