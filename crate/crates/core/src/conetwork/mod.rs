//! Weighted co-occurrence networks with Louvain community detection and
//! Kamada-Kawai layout.
//!
//! Nodes are entities at one analysis level (authors, institutions or
//! countries); an edge's weight counts the distinct publications on which
//! its two endpoints co-occur. Edges below the minimum weight are pruned,
//! then nodes left without edges are dropped (and reported in diagnostics).
//!
//! Both algorithms are deterministic for a fixed seed: every random choice
//! (Louvain visit order, layout initialization) flows from a seeded
//! ChaCha8 generator.

mod layout;
mod louvain;

pub use layout::{
    kamada_kawai_connected, layout_stress, GraphLayout, DEFAULT_LAYOUT_TOLERANCE, DEFAULT_MAX_ITER,
};
pub use louvain::{louvain_graph, modularity_graph, GraphPartition};

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::diag::Diagnostic;
use crate::wos::Publication;
use crate::Level;

/// Default edge-weight threshold: only pairs that collaborated on at least
/// two publications are kept.
pub const DEFAULT_MIN_EDGE_WEIGHT: u32 = 2;

/// An undirected weighted graph on integer node ids `0..n`, the form the
/// community-detection and layout algorithms operate on. Self-loops are
/// allowed (they appear in Louvain's aggregated graphs) and count twice in
/// a node's degree, once in the total weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Graph {
        debug_assert!(edges.iter().all(|&(u, v, w)| u < n && v < n && w >= 0.0));
        Graph { n, edges }
    }

    /// Neighbor lists. An edge (u,v) appears in both endpoint lists; a
    /// self-loop appears once in its node's list.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, w) in &self.edges {
            adj[u].push((v, w));
            if u != v {
                adj[v].push((u, w));
            }
        }
        adj
    }

    /// Weighted degrees; a self-loop contributes twice its weight.
    pub fn degrees(&self) -> Vec<f64> {
        let mut k = vec![0.0; self.n];
        for &(u, v, w) in &self.edges {
            if u == v {
                k[u] += 2.0 * w;
            } else {
                k[u] += w;
                k[v] += w;
            }
        }
        k
    }

    /// Total edge weight m (each edge once, self-loops once).
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|&(_, _, w)| w).sum()
    }
}

/// Co-occurrence network at one analysis level. `nodes` is sorted; each
/// edge is `(u, v, weight)` with `u < v` indexing into `nodes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoNetwork {
    pub level: Level,
    pub nodes: Vec<String>,
    pub edges: Vec<(usize, usize, u32)>,
}

impl CoNetwork {
    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes
            .binary_search_by(|probe| probe.as_str().cmp(name))
            .ok()
    }

    pub fn to_graph(&self) -> Graph {
        Graph::new(
            self.nodes.len(),
            self.edges
                .iter()
                .map(|&(u, v, w)| (u, v, f64::from(w)))
                .collect(),
        )
    }

    pub fn edge_weight(&self, a: &str, b: &str) -> Option<u32> {
        let (ia, ib) = (self.node_index(a)?, self.node_index(b)?);
        let key = (ia.min(ib), ia.max(ib));
        self.edges
            .iter()
            .find(|&&(u, v, _)| (u, v) == key)
            .map(|&(_, _, w)| w)
    }
}

/// Community assignment over a network's nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    /// Node → community id; ids are dense from 0, numbered by first
    /// appearance in node order.
    pub assignment: BTreeMap<String, usize>,
    pub modularity: f64,
}

/// 2D node placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub positions: BTreeMap<String, (f64, f64)>,
    /// Σ over same-component node pairs of (‖p_u−p_v‖ − d_uv)²/d_uv².
    pub stress: f64,
}

/// The distinct entities a publication contributes at a level: the
/// canonical byline for authors; all address entities (falling back to the
/// corresponding-author entries when no address is present) for
/// institutions and countries. Unresolvable (empty) entities are skipped —
/// an "unknown" node would fuse unrelated publications.
pub(crate) fn publication_entities(
    corpus: &Corpus,
    publication: &Publication,
    level: Level,
) -> BTreeSet<String> {
    let mut entities: BTreeSet<String> = match level {
        Level::Author => corpus.canonical_byline(publication).into_iter().collect(),
        Level::Institution => {
            if publication.addresses.is_empty() {
                publication
                    .reprint_entries
                    .iter()
                    .map(|r| corpus.canonical_institution(&r.institution_raw))
                    .collect()
            } else {
                publication
                    .addresses
                    .iter()
                    .map(|a| corpus.canonical_institution(&a.institution_raw))
                    .collect()
            }
        }
        Level::Country => {
            if publication.addresses.is_empty() {
                publication
                    .reprint_entries
                    .iter()
                    .map(|r| corpus.canonical_country(&r.country_raw))
                    .collect()
            } else {
                publication
                    .addresses
                    .iter()
                    .map(|a| corpus.canonical_country(&a.country_raw))
                    .collect()
            }
        }
    };
    entities.remove("");
    entities.remove(crate::yindex::UNKNOWN_ENTITY);
    entities
}

/// Build the co-occurrence network at a level. Every unordered pair of
/// distinct entities on one publication gains weight 1 (at most 1 per
/// publication); edges below `min_edge_weight` are dropped, then nodes
/// without surviving edges are removed and reported in an INFO diagnostic.
pub fn build_network(
    corpus: &Corpus,
    level: Level,
    min_edge_weight: u32,
) -> (CoNetwork, Vec<Diagnostic>) {
    let mut weights: BTreeMap<(String, String), u32> = BTreeMap::new();
    let mut all_entities: BTreeSet<String> = BTreeSet::new();
    for p in &corpus.publications {
        let entities: Vec<String> = publication_entities(corpus, p, level).into_iter().collect();
        all_entities.extend(entities.iter().cloned());
        for i in 0..entities.len() {
            for j in (i + 1)..entities.len() {
                // BTreeSet iteration is sorted, so entities[i] < entities[j]
                let key = (entities[i].clone(), entities[j].clone());
                *weights.entry(key).or_insert(0) += 1;
            }
        }
    }

    let threshold = min_edge_weight.max(1);
    let surviving: Vec<((String, String), u32)> = weights
        .into_iter()
        .filter(|&(_, w)| w >= threshold)
        .collect();

    let nodes: Vec<String> = surviving
        .iter()
        .flat_map(|((a, b), _)| [a.clone(), b.clone()])
        .collect::<BTreeSet<String>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, name)| (name.as_str(), i))
        .collect();

    let mut edges: Vec<(usize, usize, u32)> = surviving
        .iter()
        .map(|((a, b), w)| {
            let (ia, ib) = (index[a.as_str()], index[b.as_str()]);
            (ia.min(ib), ia.max(ib), *w)
        })
        .collect();
    edges.sort_unstable();

    let mut diags = Vec::new();
    let pruned: Vec<&String> = all_entities
        .iter()
        .filter(|e| !index.contains_key(e.as_str()))
        .collect();
    if !pruned.is_empty() {
        let sample: Vec<&str> = pruned.iter().take(5).map(|s| s.as_str()).collect();
        diags.push(Diagnostic::info(
            format!("network/{level}"),
            format!(
                "pruned {} of {} {level} node(s) with no edge of weight >= {threshold} (e.g. {})",
                pruned.len(),
                all_entities.len(),
                sample.join(", ")
            ),
        ));
    }

    (
        CoNetwork {
            level,
            nodes,
            edges,
        },
        diags,
    )
}

/// Weighted degree per node: the sum of incident edge weights ("total link
/// strength"). Nodes without edges report 0.
pub fn network_degrees(network: &CoNetwork) -> BTreeMap<String, u64> {
    let mut degrees: BTreeMap<String, u64> = network.nodes.iter().map(|n| (n.clone(), 0)).collect();
    for &(u, v, w) in &network.edges {
        *degrees.get_mut(&network.nodes[u]).unwrap() += u64::from(w);
        *degrees.get_mut(&network.nodes[v]).unwrap() += u64::from(w);
    }
    degrees
}

/// Unweighted degree per node: the number of distinct collaboration
/// partners.
pub fn network_link_counts(network: &CoNetwork) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> =
        network.nodes.iter().map(|n| (n.clone(), 0)).collect();
    for &(u, v, _) in &network.edges {
        *counts.get_mut(&network.nodes[u]).unwrap() += 1;
        *counts.get_mut(&network.nodes[v]).unwrap() += 1;
    }
    counts
}

/// Louvain community detection (resolution 1.0). The node visit order is a
/// seed-determined shuffle; identical `(network, seed)` gives identical
/// output. A zero-weight network yields singleton communities with Q = 0.
pub fn louvain(network: &CoNetwork, seed: u64) -> Partition {
    let graph = network.to_graph();
    let result = louvain_graph(&graph, seed);
    Partition {
        assignment: network
            .nodes
            .iter()
            .cloned()
            .zip(result.assignment.iter().copied())
            .collect(),
        modularity: result.modularity,
    }
}

/// Weighted modularity Q of an assignment over the network's nodes. Nodes
/// missing from the assignment are treated as singleton communities.
pub fn modularity(network: &CoNetwork, assignment: &BTreeMap<String, usize>) -> f64 {
    let graph = network.to_graph();
    let mut next_fresh = assignment.values().copied().max().map_or(0, |m| m + 1);
    let vector: Vec<usize> = network
        .nodes
        .iter()
        .map(|node| {
            assignment.get(node).copied().unwrap_or_else(|| {
                let id = next_fresh;
                next_fresh += 1;
                id
            })
        })
        .collect();
    modularity_graph(&graph, &vector)
}

/// Kamada-Kawai layout. Connected components are laid out independently
/// (sharing one seeded generator, consumed in component order) and packed
/// row-major on a square grid whose cell size leaves at least one component
/// diameter of padding. Stress never increases across iterations.
pub fn kamada_kawai(network: &CoNetwork, seed: u64, tolerance: f64, max_iter: usize) -> Layout {
    let graph = network.to_graph();
    let components = connected_components(&graph);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    struct PlacedComponent {
        nodes: Vec<usize>,
        positions: Vec<(f64, f64)>,
        stress: f64,
        half_width: f64,
        half_height: f64,
        diameter: f64,
    }

    let mut placed: Vec<PlacedComponent> = Vec::new();
    for nodes in components {
        let local_index: BTreeMap<usize, usize> =
            nodes.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let local_edges: Vec<(usize, usize, f64)> = graph
            .edges
            .iter()
            .filter(|(u, v, _)| local_index.contains_key(u) && local_index.contains_key(v))
            .map(|&(u, v, w)| (local_index[&u], local_index[&v], w))
            .collect();
        let local = Graph::new(nodes.len(), local_edges);
        let result = layout::kamada_kawai_component(&local, &mut rng, tolerance, max_iter);

        // Recenter on the bounding-box midpoint.
        let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &result.positions {
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
        let (cx, cy) = ((min_x + max_x) / 2.0, (min_y + max_y) / 2.0);
        let positions: Vec<(f64, f64)> = result
            .positions
            .iter()
            .map(|&(x, y)| (x - cx, y - cy))
            .collect();
        let (w, h) = (max_x - min_x, max_y - min_y);
        placed.push(PlacedComponent {
            nodes,
            positions,
            stress: result.stress,
            half_width: w / 2.0,
            half_height: h / 2.0,
            diameter: (w * w + h * h).sqrt().max(1.0),
        });
    }

    let cell = placed
        .iter()
        .map(|c| (2.0 * c.half_width).max(2.0 * c.half_height) + c.diameter)
        .fold(1.0_f64, f64::max);
    let columns = (placed.len() as f64).sqrt().ceil().max(1.0) as usize;

    let mut positions: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let mut stress = 0.0;
    for (i, component) in placed.iter().enumerate() {
        let (col, row) = (i % columns, i / columns);
        let (ox, oy) = (col as f64 * cell, row as f64 * cell);
        for (&global, &(x, y)) in component.nodes.iter().zip(&component.positions) {
            positions.insert(network.nodes[global].clone(), (x + ox, y + oy));
        }
        stress += component.stress;
    }
    Layout { positions, stress }
}

/// Connected components as sorted node-id lists, ordered by smallest
/// member.
pub fn connected_components(graph: &Graph) -> Vec<Vec<usize>> {
    let adj = graph.adjacency();
    let mut seen = vec![false; graph.n];
    let mut components = Vec::new();
    for start in 0..graph.n {
        if seen[start] {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([start]);
        seen[start] = true;
        let mut members = Vec::new();
        while let Some(u) = queue.pop_front() {
            members.push(u);
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}
