//! Weighted directed transaction graphs and their structural metrics.
//!
//! Nodes are accounts, an edge (seller, buyer) aggregates every transaction
//! with that ordered pair, weighted by total BTC moved. Category graphs (EHG,
//! ELG, NMG, ABG, CG) all come from the same constructor with a node filter.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use thiserror::Error;

use crate::record::{AccountId, TransactionTuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no nodes")]
    EmptyGraph,
}

/// Aggregate weight and trade count of one directed edge.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeData {
    pub weight: f64,
    pub tx_count: u64,
}

/// Directed graph with BTC-volume edge weights. Self-loops are permitted;
/// nodes without any surviving edge are not stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedDigraph {
    edges: BTreeMap<(AccountId, AccountId), EdgeData>,
    nodes: BTreeSet<AccountId>,
}

impl WeightedDigraph {
    /// Builds the graph from tuples whose BOTH endpoints pass the filter.
    pub fn from_tuples(
        tuples: &[TransactionTuple],
        mut node_filter: impl FnMut(AccountId) -> bool,
    ) -> Self {
        let mut g = WeightedDigraph::default();
        for t in tuples {
            if node_filter(t.seller) && node_filter(t.buyer) {
                g.add(t.seller, t.buyer, t.volume);
            }
        }
        g
    }

    fn add(&mut self, seller: AccountId, buyer: AccountId, volume: f64) {
        let e = self
            .edges
            .entry((seller, buyer))
            .or_insert(EdgeData { weight: 0.0, tx_count: 0 });
        e.weight += volume;
        e.tx_count += 1;
        self.nodes.insert(seller);
        self.nodes.insert(buyer);
    }

    /// Edge-wise merge of another graph into this one.
    pub fn merge(&mut self, other: &WeightedDigraph) {
        for (&(s, b), e) in &other.edges {
            let slot = self
                .edges
                .entry((s, b))
                .or_insert(EdgeData { weight: 0.0, tx_count: 0 });
            slot.weight += e.weight;
            slot.tx_count += e.tx_count;
        }
        self.nodes.extend(other.nodes.iter().copied());
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.values().map(|e| e.weight).sum()
    }

    pub fn contains_node(&self, id: AccountId) -> bool {
        self.nodes.contains(&id)
    }

    pub fn edge(&self, seller: AccountId, buyer: AccountId) -> Option<&EdgeData> {
        self.edges.get(&(seller, buyer))
    }

    pub fn nodes(&self) -> impl Iterator<Item = AccountId> + '_ {
        self.nodes.iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = ((AccountId, AccountId), &EdgeData)> {
        self.edges.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Which degree a distribution counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMode {
    In,
    Out,
    Total,
}

/// Which clustering coefficient a stats run reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusteringKind {
    /// Mean of the per-node local coefficients (nodes of degree < 2 count 0).
    AverageLocal,
    /// Global transitivity: 3 * triangles / wedges.
    GlobalTransitivity,
}

/// Headline metrics of one graph.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphStats {
    pub n_nodes: u64,
    pub n_edges: u64,
    pub avg_clustering: f64,
    /// Edges per node (E/N, matching the published table arithmetic).
    pub avg_degree: f64,
    /// Total BTC weight per node.
    pub avg_weighted_degree: f64,
}

/// Undirected simple projection: direction ignored, self-loops removed,
/// parallel directions merged. Adjacency lists come out sorted.
fn undirected_projection(g: &WeightedDigraph) -> (Vec<AccountId>, Vec<Vec<u32>>) {
    let ids: Vec<AccountId> = g.nodes().collect();
    let index: BTreeMap<AccountId, u32> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (*id, i as u32))
        .collect();
    let mut neighbor_sets: Vec<BTreeSet<u32>> = alloc::vec![BTreeSet::new(); ids.len()];
    for ((s, b), _) in g.edges() {
        if s == b {
            continue;
        }
        let (i, j) = (index[&s], index[&b]);
        neighbor_sets[i as usize].insert(j);
        neighbor_sets[j as usize].insert(i);
    }
    let adjacency = neighbor_sets
        .into_iter()
        .map(|s| s.into_iter().collect())
        .collect();
    (ids, adjacency)
}

fn sorted_intersection_count(a: &[u32], b: &[u32]) -> (u64, Vec<u32>) {
    let mut common = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                common.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    (common.len() as u64, common)
}

/// Per-node triangle participation counts on the undirected projection.
fn triangle_counts(adjacency: &[Vec<u32>]) -> Vec<u64> {
    let mut raw = alloc::vec![0u64; adjacency.len()];
    for (u, neighbors) in adjacency.iter().enumerate() {
        for &v in neighbors {
            let v = v as usize;
            if v <= u {
                continue;
            }
            let (_, common) = sorted_intersection_count(neighbors, &adjacency[v]);
            for w in common {
                raw[u] += 1;
                raw[v] += 1;
                raw[w as usize] += 1;
            }
        }
    }
    // Each triangle reaches every member once per triangle edge.
    for c in &mut raw {
        debug_assert_eq!(*c % 3, 0);
        *c /= 3;
    }
    raw
}

/// Average local clustering coefficient of the undirected projection.
pub fn average_clustering(g: &WeightedDigraph) -> Result<f64, GraphError> {
    if g.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    let (_, adjacency) = undirected_projection(g);
    let triangles = triangle_counts(&adjacency);
    let mut sum = 0.0;
    for (v, neighbors) in adjacency.iter().enumerate() {
        let k = neighbors.len() as u64;
        if k >= 2 {
            sum += triangles[v] as f64 / (k * (k - 1) / 2) as f64;
        }
    }
    Ok(sum / adjacency.len() as f64)
}

/// Global transitivity of the undirected projection.
pub fn global_clustering(g: &WeightedDigraph) -> Result<f64, GraphError> {
    if g.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    let (_, adjacency) = undirected_projection(g);
    let triangles = triangle_counts(&adjacency);
    let total_triangles: u64 = triangles.iter().sum::<u64>() / 3;
    let wedges: u64 = adjacency
        .iter()
        .map(|n| {
            let k = n.len() as u64;
            k * (k.saturating_sub(1)) / 2
        })
        .sum();
    if wedges == 0 {
        return Ok(0.0);
    }
    Ok(3.0 * total_triangles as f64 / wedges as f64)
}

/// Node count, edge count, clustering, and the two average degrees.
pub fn graph_stats(g: &WeightedDigraph, clustering: ClusteringKind) -> Result<GraphStats, GraphError> {
    if g.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    let n = g.node_count() as f64;
    let avg_clustering = match clustering {
        ClusteringKind::AverageLocal => average_clustering(g)?,
        ClusteringKind::GlobalTransitivity => global_clustering(g)?,
    };
    Ok(GraphStats {
        n_nodes: g.node_count() as u64,
        n_edges: g.edge_count() as u64,
        avg_clustering,
        avg_degree: g.edge_count() as f64 / n,
        avg_weighted_degree: g.total_weight() / n,
    })
}

/// Histogram of directed degrees (distinct stored edges per node).
pub fn degree_distribution(g: &WeightedDigraph, mode: DegreeMode) -> BTreeMap<u64, u64> {
    let mut degrees: BTreeMap<AccountId, u64> = g.nodes().map(|n| (n, 0)).collect();
    for ((s, b), _) in g.edges() {
        if matches!(mode, DegreeMode::Out | DegreeMode::Total) {
            *degrees.get_mut(&s).unwrap() += 1;
        }
        if matches!(mode, DegreeMode::In | DegreeMode::Total) {
            *degrees.get_mut(&b).unwrap() += 1;
        }
    }
    let mut histogram = BTreeMap::new();
    for (_, d) in degrees {
        *histogram.entry(d).or_insert(0) += 1;
    }
    histogram
}

/// Degree values per node (for power-law fitting), in node id order.
pub fn degree_sequence(g: &WeightedDigraph, mode: DegreeMode) -> Vec<u64> {
    let mut degrees: BTreeMap<AccountId, u64> = g.nodes().map(|n| (n, 0)).collect();
    for ((s, b), _) in g.edges() {
        if matches!(mode, DegreeMode::Out | DegreeMode::Total) {
            *degrees.get_mut(&s).unwrap() += 1;
        }
        if matches!(mode, DegreeMode::In | DegreeMode::Total) {
            *degrees.get_mut(&b).unwrap() += 1;
        }
    }
    degrees.into_values().collect()
}

/// Verifies that `avg_degree` uses the E/N convention; used by tests and the
/// stats report.
pub fn average_degree(n_nodes: u64, n_edges: u64) -> f64 {
    n_edges as f64 / n_nodes as f64
}
