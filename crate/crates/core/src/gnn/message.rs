use std::collections::BTreeSet;

use crate::graph::PackedGraph;

/// Undirected message-passing structure of a batch.
///
/// Every distinct non-loop node pair is kept once and messages flow both ways;
/// input self-loops and parallel edges are dropped. GCN coefficients use the
/// degree plus one for the added self-loop.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageGraph {
    num_nodes: usize,
    graph_ids: Vec<usize>,
    graph_sizes: Vec<usize>,
    src: Vec<usize>,
    dst: Vec<usize>,
    gcn_edge: Vec<f32>,
    gcn_self: Vec<f32>,
}

impl MessageGraph {
    pub fn new(pg: &PackedGraph) -> Self {
        let pairs = pg.edges().iter().map(|e| (e.head, e.tail));
        Self::from_parts(&pg.num_nodes_per_graph(), pairs)
    }

    /// Builds from member sizes and edges over global node indices.
    pub fn from_parts(sizes: &[usize], edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let num_nodes: usize = sizes.iter().sum();
        let graph_ids = sizes
            .iter()
            .enumerate()
            .flat_map(|(g, &n)| std::iter::repeat_n(g, n))
            .collect();
        let pairs: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .filter(|(u, v)| u != v)
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        let mut degree = vec![1usize; num_nodes];
        let mut src = Vec::with_capacity(2 * pairs.len());
        let mut dst = Vec::with_capacity(2 * pairs.len());
        for &(u, v) in &pairs {
            degree[u] += 1;
            degree[v] += 1;
            src.extend([u, v]);
            dst.extend([v, u]);
        }
        let gcn_edge = src
            .iter()
            .zip(&dst)
            .map(|(&u, &v)| 1.0 / ((degree[u] * degree[v]) as f32).sqrt())
            .collect();
        let gcn_self = degree.iter().map(|&d| 1.0 / d as f32).collect();
        Self {
            num_nodes,
            graph_ids,
            graph_sizes: sizes.to_vec(),
            src,
            dst,
            gcn_edge,
            gcn_self,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_graphs(&self) -> usize {
        self.graph_sizes.len()
    }

    pub fn graph_sizes(&self) -> &[usize] {
        &self.graph_sizes
    }

    pub fn graph_ids(&self) -> &[usize] {
        &self.graph_ids
    }

    /// Message sources, one per direction of every undirected edge.
    pub fn sources(&self) -> &[usize] {
        &self.src
    }

    pub fn targets(&self) -> &[usize] {
        &self.dst
    }

    /// `1 / √(d̂_u d̂_v)` per message.
    pub fn gcn_edge_weights(&self) -> &[f32] {
        &self.gcn_edge
    }

    /// `1 / d̂_v` per node.
    pub fn gcn_self_weights(&self) -> &[f32] {
        &self.gcn_self
    }
}
