//! Louvain community detection on weighted undirected graphs.
//!
//! Phase 1 moves single nodes into the neighboring community with the
//! largest positive modularity gain; phase 2 collapses communities into
//! super-nodes (intra-community weight becomes a self-loop) and repeats.
//! The outer loop stops when a full level improves modularity by less than
//! `1e-7`. All tie-breaks are deterministic and the visit order comes from
//! the seeded generator, so identical inputs and seed give identical
//! output.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Graph;

/// Minimum modularity improvement for another level of aggregation.
const LEVEL_IMPROVEMENT: f64 = 1e-7;
/// Minimum gain for a node to switch community (guards float jitter).
const MOVE_EPSILON: f64 = 1e-12;

/// Community assignment over graph node ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPartition {
    /// `assignment[node]` = community id; ids are dense from 0, numbered
    /// by first appearance in node order.
    pub assignment: Vec<usize>,
    pub modularity: f64,
}

/// Weighted modularity: Q = Σ_c [L_c/m − (k_c/2m)²] where L_c is the
/// intra-community edge weight (self-loops once), k_c the community's total
/// degree (self-loops twice) and m the total edge weight. Zero-weight
/// graphs score 0.
pub fn modularity_graph(graph: &Graph, assignment: &[usize]) -> f64 {
    assert_eq!(
        assignment.len(),
        graph.n,
        "assignment must cover every node"
    );
    let m = graph.total_weight();
    if m <= 0.0 {
        return 0.0;
    }
    let degrees = graph.degrees();
    let mut intra: BTreeMap<usize, f64> = BTreeMap::new();
    let mut degree_sum: BTreeMap<usize, f64> = BTreeMap::new();
    for &(u, v, w) in &graph.edges {
        if assignment[u] == assignment[v] {
            *intra.entry(assignment[u]).or_insert(0.0) += w;
        }
    }
    for (node, &k) in degrees.iter().enumerate() {
        *degree_sum.entry(assignment[node]).or_insert(0.0) += k;
    }
    degree_sum
        .iter()
        .map(|(community, &k_c)| {
            let l_c = intra.get(community).copied().unwrap_or(0.0);
            l_c / m - (k_c / (2.0 * m)).powi(2)
        })
        .sum()
}

/// One Louvain level: repeated single-node moves until no move improves
/// modularity. Returns the community of each node (community ids are node
/// ids of this graph) and whether any node moved.
fn one_level(graph: &Graph, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = graph.n;
    let adjacency = graph.adjacency();
    let degrees = graph.degrees();
    let two_m: f64 = degrees.iter().sum();
    let mut community: Vec<usize> = (0..n).collect();
    let mut sigma_tot = degrees.clone();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut any_move = false;
    let mut improved = true;
    // Strictly improving moves terminate; the sweep cap is a safety net.
    let mut sweeps = 0;
    while improved && sweeps < 1000 {
        improved = false;
        sweeps += 1;
        for &node in &order {
            let current = community[node];
            // Weight from `node` to each adjacent community (loops excluded:
            // they are invariant under the move).
            let mut weight_to: BTreeMap<usize, f64> = BTreeMap::new();
            weight_to.insert(current, 0.0);
            for &(neighbor, w) in &adjacency[node] {
                if neighbor != node {
                    *weight_to.entry(community[neighbor]).or_insert(0.0) += w;
                }
            }
            // Evaluate gains with the node lifted out of its community.
            sigma_tot[current] -= degrees[node];
            let gain_of =
                |target: usize, weight: f64| weight - degrees[node] * sigma_tot[target] / two_m;
            let mut best = current;
            let mut best_gain = gain_of(current, weight_to[&current]);
            for (&candidate, &weight) in &weight_to {
                if candidate == current {
                    continue;
                }
                let gain = gain_of(candidate, weight);
                if gain > best_gain + MOVE_EPSILON {
                    best_gain = gain;
                    best = candidate;
                }
            }
            sigma_tot[best] += degrees[node];
            community[node] = best;
            if best != current {
                improved = true;
                any_move = true;
            }
        }
    }
    (community, any_move)
}

/// Relabel community ids densely from 0 by first appearance in node order.
fn relabel_dense(assignment: &[usize]) -> Vec<usize> {
    let mut mapping: BTreeMap<usize, usize> = BTreeMap::new();
    let mut next = 0;
    assignment
        .iter()
        .map(|&c| {
            *mapping.entry(c).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

/// Collapse communities into super-nodes; intra-community weight becomes a
/// self-loop. Returns the aggregated graph and the dense relabeling of
/// community ids used as its node ids.
fn aggregate(graph: &Graph, community: &[usize]) -> (Graph, Vec<usize>) {
    let dense = relabel_dense(community);
    let n_communities = dense.iter().copied().max().map_or(0, |m| m + 1);
    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(u, v, w) in &graph.edges {
        let (a, b) = (dense[u], dense[v]);
        let key = (a.min(b), a.max(b));
        *weights.entry(key).or_insert(0.0) += w;
    }
    let edges: Vec<(usize, usize, f64)> =
        weights.into_iter().map(|((u, v), w)| (u, v, w)).collect();
    (Graph::new(n_communities, edges), dense)
}

/// Louvain community detection, resolution 1.0. The returned modularity is
/// recomputed on the original graph from the final assignment.
pub fn louvain_graph(graph: &Graph, seed: u64) -> GraphPartition {
    if graph.n == 0 {
        return GraphPartition {
            assignment: Vec::new(),
            modularity: 0.0,
        };
    }
    if graph.total_weight() <= 0.0 {
        return GraphPartition {
            assignment: (0..graph.n).collect(),
            modularity: 0.0,
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // node_to_community[original node] = node id in the current level graph.
    let mut node_to_community: Vec<usize> = (0..graph.n).collect();
    let mut level_graph = graph.clone();
    let mut q_previous = modularity_graph(graph, &node_to_community);

    loop {
        let (community, any_move) = one_level(&level_graph, &mut rng);
        if !any_move {
            break;
        }
        let (aggregated, dense) = aggregate(&level_graph, &community);
        for slot in &mut node_to_community {
            *slot = dense[community[*slot]];
        }
        let q_now = modularity_graph(graph, &node_to_community);
        level_graph = aggregated;
        if q_now - q_previous < LEVEL_IMPROVEMENT {
            break;
        }
        q_previous = q_now;
    }

    let assignment = relabel_dense(&node_to_community);
    let modularity = modularity_graph(graph, &assignment);
    GraphPartition {
        assignment,
        modularity,
    }
}
