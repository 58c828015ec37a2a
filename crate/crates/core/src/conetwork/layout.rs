//! Kamada-Kawai force-directed layout.
//!
//! Ideal pairwise distances are unweighted shortest-path hop counts,
//! rescaled so their mean is 1. The layout minimizes the normalized stress
//! Σ_{u<v} (‖p_u − p_v‖ − d_uv)² / d_uv² by sweeping over nodes and taking
//! a damped 2×2 Newton step per node; a step is only accepted when it
//! lowers that node's share of the stress, so total stress never increases
//! from one sweep to the next. The initial placement is a circle with a
//! seed-shuffled angular order, making the whole layout deterministic for
//! a fixed seed.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{connected_components, Graph};

/// Stop once a sweep improves stress by less than this relative amount.
pub const DEFAULT_LAYOUT_TOLERANCE: f64 = 1e-7;
/// Hard cap on optimization sweeps.
pub const DEFAULT_MAX_ITER: usize = 500;

/// Guard against division by a vanishing inter-node distance.
const MIN_DISTANCE: f64 = 1e-9;

/// Layout of a graph by node id.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphLayout {
    pub positions: Vec<(f64, f64)>,
    /// Σ over same-component pairs of (‖p_u−p_v‖ − d)²/d².
    pub stress: f64,
    /// Total stress after initialization and after every sweep;
    /// non-increasing.
    pub trace: Vec<f64>,
}

/// Unweighted BFS hop counts from `start`; `usize::MAX` marks unreachable
/// nodes.
fn hop_counts(adjacency: &[Vec<(usize, f64)>], start: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adjacency.len()];
    dist[start] = 0;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &(v, _) in &adjacency[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Ideal distance matrix for a connected graph: hop counts scaled so the
/// mean over unordered pairs is 1. Panics if the graph is disconnected.
fn ideal_distances(graph: &Graph) -> Vec<Vec<f64>> {
    let n = graph.n;
    let adjacency = graph.adjacency();
    let hops: Vec<Vec<usize>> = (0..n).map(|s| hop_counts(&adjacency, s)).collect();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for (u, row) in hops.iter().enumerate() {
        for &hop in &row[(u + 1)..] {
            assert!(hop != usize::MAX, "graph must be connected");
            sum += hop as f64;
            pairs += 1;
        }
    }
    let mean = if pairs > 0 { sum / pairs as f64 } else { 1.0 };
    (0..n)
        .map(|u| (0..n).map(|v| hops[u][v] as f64 / mean).collect())
        .collect()
}

fn total_stress(ideal: &[Vec<f64>], positions: &[(f64, f64)]) -> f64 {
    let n = positions.len();
    let mut stress = 0.0;
    for u in 0..n {
        for v in (u + 1)..n {
            let d = ideal[u][v];
            let r = distance(positions[u], positions[v]);
            stress += (r - d) * (r - d) / (d * d);
        }
    }
    stress
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// The terms of the stress involving node `u`, with `u` at `candidate`.
fn node_stress(
    ideal: &[Vec<f64>],
    positions: &[(f64, f64)],
    u: usize,
    candidate: (f64, f64),
) -> f64 {
    let mut stress = 0.0;
    for v in 0..positions.len() {
        if v == u {
            continue;
        }
        let d = ideal[u][v];
        let r = distance(candidate, positions[v]);
        stress += (r - d) * (r - d) / (d * d);
    }
    stress
}

/// One damped Newton update of node `u`. Only applied when it strictly
/// lowers the node's share of the stress.
fn improve_node(ideal: &[Vec<f64>], positions: &mut [(f64, f64)], u: usize) {
    let n = positions.len();
    let (x, y) = positions[u];
    let (mut gx, mut gy) = (0.0, 0.0);
    let (mut hxx, mut hxy, mut hyy) = (0.0, 0.0, 0.0);
    for v in 0..n {
        if v == u {
            continue;
        }
        let d = ideal[u][v];
        let k = 1.0 / (d * d);
        let dx = x - positions[v].0;
        let dy = y - positions[v].1;
        let r = distance(positions[u], positions[v]).max(MIN_DISTANCE);
        gx += 2.0 * k * dx * (1.0 - d / r);
        gy += 2.0 * k * dy * (1.0 - d / r);
        hxx += 2.0 * k * (1.0 - d / r + d * dx * dx / (r * r * r));
        hyy += 2.0 * k * (1.0 - d / r + d * dy * dy / (r * r * r));
        hxy += 2.0 * k * d * dx * dy / (r * r * r);
    }
    let gnorm = (gx * gx + gy * gy).sqrt();
    if gnorm == 0.0 {
        return;
    }
    let det = hxx * hyy - hxy * hxy;
    let (mut sx, mut sy) = if det.abs() > 1e-12 {
        ((-gx * hyy + gy * hxy) / det, (-gy * hxx + gx * hxy) / det)
    } else {
        // Degenerate curvature: take a short gradient-descent step.
        (-gx / gnorm * 0.1, -gy / gnorm * 0.1)
    };

    let before = node_stress(ideal, positions, u, (x, y));
    for _ in 0..30 {
        let candidate = (x + sx, y + sy);
        if node_stress(ideal, positions, u, candidate) < before {
            positions[u] = candidate;
            return;
        }
        sx /= 2.0;
        sy /= 2.0;
    }
}

/// Lay out one connected graph. The circular initial placement's angular
/// order comes from the shared generator.
pub(super) fn kamada_kawai_component(
    graph: &Graph,
    rng: &mut ChaCha8Rng,
    tolerance: f64,
    max_iter: usize,
) -> GraphLayout {
    let n = graph.n;
    if n == 0 {
        return GraphLayout {
            positions: Vec::new(),
            stress: 0.0,
            trace: vec![0.0],
        };
    }
    if n == 1 {
        return GraphLayout {
            positions: vec![(0.0, 0.0)],
            stress: 0.0,
            trace: vec![0.0],
        };
    }

    let ideal = ideal_distances(graph);
    let d_max = ideal
        .iter()
        .flat_map(|row| row.iter().copied())
        .fold(0.0_f64, f64::max);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let radius = d_max / 2.0;
    let mut positions = vec![(0.0, 0.0); n];
    for (slot, &node) in order.iter().enumerate() {
        let angle = 2.0 * std::f64::consts::PI * slot as f64 / n as f64;
        positions[node] = (radius * angle.cos(), radius * angle.sin());
    }

    let mut trace = vec![total_stress(&ideal, &positions)];
    for _ in 0..max_iter {
        for u in 0..n {
            improve_node(&ideal, &mut positions, u);
        }
        let stress = total_stress(&ideal, &positions);
        let previous = *trace.last().unwrap();
        debug_assert!(
            stress <= previous + 1e-9,
            "stress increased: {previous} -> {stress}"
        );
        trace.push(stress);
        if previous <= 0.0 || (previous - stress) / previous < tolerance {
            break;
        }
    }

    let stress = *trace.last().unwrap();
    GraphLayout {
        positions,
        stress,
        trace,
    }
}

/// Lay out a connected graph from a fresh generator seeded with `seed`.
pub fn kamada_kawai_connected(
    graph: &Graph,
    seed: u64,
    tolerance: f64,
    max_iter: usize,
) -> GraphLayout {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    kamada_kawai_component(graph, &mut rng, tolerance, max_iter)
}

/// Recompute the normalized stress of `positions` against the graph's
/// ideal distances. Pairs in different components carry no ideal distance
/// and are excluded; each component is scaled independently (mean ideal
/// distance 1), matching the layout algorithm.
pub fn layout_stress(graph: &Graph, positions: &[(f64, f64)]) -> f64 {
    assert_eq!(positions.len(), graph.n);
    let mut stress = 0.0;
    for nodes in connected_components(graph) {
        if nodes.len() < 2 {
            continue;
        }
        let local_index: std::collections::BTreeMap<usize, usize> =
            nodes.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let local_edges: Vec<(usize, usize, f64)> = graph
            .edges
            .iter()
            .filter(|(u, v, _)| local_index.contains_key(u) && local_index.contains_key(v))
            .map(|&(u, v, w)| (local_index[&u], local_index[&v], w))
            .collect();
        let local = Graph::new(nodes.len(), local_edges);
        let ideal = ideal_distances(&local);
        let local_positions: Vec<(f64, f64)> = nodes.iter().map(|&g| positions[g]).collect();
        stress += total_stress(&ideal, &local_positions);
    }
    stress
}
