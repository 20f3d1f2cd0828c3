//! Attributed directed multigraphs and their packed batch form.
//!
//! A [`Graph`] carries three named attribute tables. Node and edge tables hold
//! tensors whose leading extent equals the node or edge count; graph-level
//! attributes have arbitrary shape. Every structural operation returns a new
//! graph whose attribute rows follow the surviving nodes and edges, in the
//! operation's documented order. Graph-level attributes are copied verbatim,
//! so a derived value such as a stored node count can go stale.

mod components;
mod edgelist;
mod packed;
mod registry;

pub use components::{connected_components, DisjointSet};
pub use edgelist::{parse_edge_list, write_edge_list};
pub use packed::PackedGraph;
pub use registry::{AttrSpec, AttributeRegistry, Schema};

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::tensor::{Tensor, TensorError};

pub type AttrTable = BTreeMap<String, Tensor>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttrLevel {
    Node,
    Edge,
    Graph,
}

impl fmt::Display for AttrLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttrLevel::Node => "node",
            AttrLevel::Edge => "edge",
            AttrLevel::Graph => "graph",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("edge {edge}: endpoint {node} out of range for {num_nodes} nodes")]
    EndpointOutOfRange {
        edge: usize,
        node: usize,
        num_nodes: usize,
    },
    #[error("edge {edge}: relation {relation:?} invalid for {num_relations:?} relations")]
    BadRelation {
        edge: usize,
        relation: Option<usize>,
        num_relations: Option<usize>,
    },
    #[error("{level} attribute `{name}` has {found} rows, expected {expected}")]
    AttributeRows {
        level: AttrLevel,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate {level} attribute `{name}`")]
    DuplicateAttribute { level: AttrLevel, name: String },
    #[error("mask has length {found}, expected {expected}")]
    MaskLength { expected: usize, found: usize },
    #[error("node {0} listed more than once")]
    DuplicateNode(usize),
    #[error("node {node} out of range for {num_nodes} nodes")]
    NodeOutOfRange { node: usize, num_nodes: usize },
    #[error("graph index {index} out of range for a batch of {len}")]
    GraphIndex { index: usize, len: usize },
    #[error("schema mismatch on {level} attribute `{name}`: {detail}")]
    Schema {
        level: AttrLevel,
        name: String,
        detail: String,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type Result<T> = std::result::Result<T, GraphError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub head: usize,
    pub tail: usize,
    pub relation: Option<usize>,
}

impl Edge {
    pub fn new(head: usize, tail: usize) -> Self {
        Self {
            head,
            tail,
            relation: None,
        }
    }

    pub fn typed(head: usize, tail: usize, relation: usize) -> Self {
        Self {
            head,
            tail,
            relation: Some(relation),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<Edge>,
    num_relations: Option<usize>,
    node_attrs: AttrTable,
    edge_attrs: AttrTable,
    graph_attrs: AttrTable,
}

/// Collects structure and attributes, then validates everything in [`GraphBuilder::build`].
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    num_nodes: usize,
    edges: Vec<Edge>,
    num_relations: Option<usize>,
    attrs: Vec<(AttrLevel, String, Tensor)>,
}

impl GraphBuilder {
    pub fn new(num_nodes: usize) -> Self {
        Self {
            num_nodes,
            ..Self::default()
        }
    }

    pub fn edges(mut self, edges: impl IntoIterator<Item = Edge>) -> Self {
        self.edges.extend(edges);
        self
    }

    pub fn pairs(self, pairs: &[(usize, usize)]) -> Self {
        self.edges(pairs.iter().map(|&(h, t)| Edge::new(h, t)))
    }

    pub fn relations(mut self, num_relations: usize) -> Self {
        self.num_relations = Some(num_relations);
        self
    }

    pub fn attr(mut self, level: AttrLevel, name: impl Into<String>, value: Tensor) -> Self {
        self.attrs.push((level, name.into(), value));
        self
    }

    pub fn node_attr(self, name: impl Into<String>, value: Tensor) -> Self {
        self.attr(AttrLevel::Node, name, value)
    }

    pub fn edge_attr(self, name: impl Into<String>, value: Tensor) -> Self {
        self.attr(AttrLevel::Edge, name, value)
    }

    pub fn graph_attr(self, name: impl Into<String>, value: Tensor) -> Self {
        self.attr(AttrLevel::Graph, name, value)
    }

    pub fn build(self) -> Result<Graph> {
        let mut g = Graph {
            num_nodes: self.num_nodes,
            edges: self.edges,
            num_relations: self.num_relations,
            node_attrs: AttrTable::new(),
            edge_attrs: AttrTable::new(),
            graph_attrs: AttrTable::new(),
        };
        for (level, name, value) in self.attrs {
            let table = match level {
                AttrLevel::Node => &mut g.node_attrs,
                AttrLevel::Edge => &mut g.edge_attrs,
                AttrLevel::Graph => &mut g.graph_attrs,
            };
            if table.contains_key(&name) {
                return Err(GraphError::DuplicateAttribute { level, name });
            }
            table.insert(name, value);
        }
        g.validate()?;
        Ok(g)
    }
}

impl Graph {
    /// Structure-only graph.
    pub fn new(num_nodes: usize, edges: Vec<Edge>) -> Result<Self> {
        GraphBuilder::new(num_nodes).edges(edges).build()
    }

    pub fn empty() -> Self {
        Self::new(0, Vec::new()).expect("empty graph is valid")
    }

    pub fn builder(num_nodes: usize) -> GraphBuilder {
        GraphBuilder::new(num_nodes)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.edges.iter().enumerate() {
            for node in [e.head, e.tail] {
                if node >= self.num_nodes {
                    return Err(GraphError::EndpointOutOfRange {
                        edge: i,
                        node,
                        num_nodes: self.num_nodes,
                    });
                }
            }
            let ok = match (e.relation, self.num_relations) {
                (None, None) => true,
                (Some(r), Some(n)) => r < n,
                _ => false,
            };
            if !ok {
                return Err(GraphError::BadRelation {
                    edge: i,
                    relation: e.relation,
                    num_relations: self.num_relations,
                });
            }
        }
        check_rows(AttrLevel::Node, &self.node_attrs, self.num_nodes)?;
        check_rows(AttrLevel::Edge, &self.edge_attrs, self.edges.len())?;
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_relations(&self) -> Option<usize> {
        self.num_relations
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_attrs(&self) -> &AttrTable {
        &self.node_attrs
    }

    pub fn edge_attrs(&self) -> &AttrTable {
        &self.edge_attrs
    }

    pub fn graph_attrs(&self) -> &AttrTable {
        &self.graph_attrs
    }

    pub fn node_attr(&self, name: &str) -> Option<&Tensor> {
        self.node_attrs.get(name)
    }

    pub fn edge_attr(&self, name: &str) -> Option<&Tensor> {
        self.edge_attrs.get(name)
    }

    pub fn graph_attr(&self, name: &str) -> Option<&Tensor> {
        self.graph_attrs.get(name)
    }

    pub fn attrs(&self, level: AttrLevel) -> &AttrTable {
        match level {
            AttrLevel::Node => &self.node_attrs,
            AttrLevel::Edge => &self.edge_attrs,
            AttrLevel::Graph => &self.graph_attrs,
        }
    }

    /// Adds or replaces an attribute, checking its row count.
    pub fn with_attr(
        mut self,
        level: AttrLevel,
        name: impl Into<String>,
        value: Tensor,
    ) -> Result<Self> {
        let name = name.into();
        let expected = match level {
            AttrLevel::Node => Some(self.num_nodes),
            AttrLevel::Edge => Some(self.edges.len()),
            AttrLevel::Graph => None,
        };
        if let Some(expected) = expected {
            if value.rank() == 0 || value.rows() != expected {
                return Err(GraphError::AttributeRows {
                    level,
                    name,
                    expected,
                    found: if value.rank() == 0 { 0 } else { value.rows() },
                });
            }
        }
        match level {
            AttrLevel::Node => self.node_attrs.insert(name, value),
            AttrLevel::Edge => self.edge_attrs.insert(name, value),
            AttrLevel::Graph => self.graph_attrs.insert(name, value),
        };
        Ok(self)
    }

    pub fn schema(&self) -> Schema {
        Schema::of_graph(self)
    }

    /// Induced subgraph on `order`, renumbering node `order[i]` to `i`.
    /// Surviving edges keep their original relative order.
    fn induced(&self, order: &[usize]) -> Result<Graph> {
        let mut new_index = vec![usize::MAX; self.num_nodes];
        for (i, &n) in order.iter().enumerate() {
            if n >= self.num_nodes {
                return Err(GraphError::NodeOutOfRange {
                    node: n,
                    num_nodes: self.num_nodes,
                });
            }
            if new_index[n] != usize::MAX {
                return Err(GraphError::DuplicateNode(n));
            }
            new_index[n] = i;
        }
        let mut kept_edges = Vec::new();
        let mut edges = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            let (h, t) = (new_index[e.head], new_index[e.tail]);
            if h != usize::MAX && t != usize::MAX {
                kept_edges.push(i);
                edges.push(Edge {
                    head: h,
                    tail: t,
                    relation: e.relation,
                });
            }
        }
        Ok(Graph {
            num_nodes: order.len(),
            edges,
            num_relations: self.num_relations,
            node_attrs: select_table(&self.node_attrs, order)?,
            edge_attrs: select_table(&self.edge_attrs, &kept_edges)?,
            graph_attrs: self.graph_attrs.clone(),
        })
    }

    /// Keeps nodes with `keep[i]`, renumbered by ascending old index. Edges
    /// touching a dropped node are removed.
    pub fn node_mask(&self, keep: &[bool]) -> Result<Graph> {
        if keep.len() != self.num_nodes {
            return Err(GraphError::MaskLength {
                expected: self.num_nodes,
                found: keep.len(),
            });
        }
        let order: Vec<usize> = (0..self.num_nodes).filter(|&i| keep[i]).collect();
        self.induced(&order)
    }

    pub fn edge_mask(&self, keep: &[bool]) -> Result<Graph> {
        if keep.len() != self.edges.len() {
            return Err(GraphError::MaskLength {
                expected: self.edges.len(),
                found: keep.len(),
            });
        }
        let kept: Vec<usize> = (0..self.edges.len()).filter(|&i| keep[i]).collect();
        Ok(Graph {
            num_nodes: self.num_nodes,
            edges: kept.iter().map(|&i| self.edges[i]).collect(),
            num_relations: self.num_relations,
            node_attrs: self.node_attrs.clone(),
            edge_attrs: select_table(&self.edge_attrs, &kept)?,
            graph_attrs: self.graph_attrs.clone(),
        })
    }

    /// Induced subgraph with nodes renumbered in the given order.
    pub fn subgraph(&self, nodes: &[usize]) -> Result<Graph> {
        self.induced(nodes)
    }

    /// One graph per weakly connected component, in component-id order.
    pub fn split_components(&self) -> Result<PackedGraph> {
        let (ids, count) = connected_components(self);
        let mut members = Vec::with_capacity(count);
        for c in 0..count {
            let keep: Vec<bool> = ids.iter().map(|&i| i == c).collect();
            members.push(self.node_mask(&keep)?);
        }
        PackedGraph::pack_with_schema(&members, self.schema())
    }

    /// Per-node edge counts. A self-loop counts once as in, once as out.
    pub fn degrees(&self, direction: Direction) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for e in &self.edges {
            if matches!(direction, Direction::Out | Direction::Both) {
                deg[e.head] += 1;
            }
            if matches!(direction, Direction::In | Direction::Both) {
                deg[e.tail] += 1;
            }
        }
        deg
    }

    /// Follows every edge `(u, v)` with its reverse `(v, u)` carrying the same
    /// attributes. Self-loops are not duplicated.
    pub fn to_undirected(&self) -> Result<Graph> {
        let mut edges = Vec::with_capacity(self.edges.len() * 2);
        let mut source = Vec::with_capacity(self.edges.len() * 2);
        for (i, e) in self.edges.iter().enumerate() {
            edges.push(*e);
            source.push(i);
            if e.head != e.tail {
                edges.push(Edge {
                    head: e.tail,
                    tail: e.head,
                    relation: e.relation,
                });
                source.push(i);
            }
        }
        Ok(Graph {
            num_nodes: self.num_nodes,
            edges,
            num_relations: self.num_relations,
            node_attrs: self.node_attrs.clone(),
            edge_attrs: select_table(&self.edge_attrs, &source)?,
            graph_attrs: self.graph_attrs.clone(),
        })
    }

    /// Undirected adjacency lists, neighbors ascending, one entry per edge.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for e in &self.edges {
            adj[e.head].push(e.tail);
            if e.head != e.tail {
                adj[e.tail].push(e.head);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Replaces one node attribute without touching structure.
    pub(crate) fn set_node_attr(&mut self, name: &str, value: Tensor) {
        debug_assert_eq!(value.rows(), self.num_nodes);
        self.node_attrs.insert(name.to_string(), value);
    }

    pub(crate) fn from_parts(
        num_nodes: usize,
        edges: Vec<Edge>,
        num_relations: Option<usize>,
        node_attrs: AttrTable,
        edge_attrs: AttrTable,
        graph_attrs: AttrTable,
    ) -> Self {
        Self {
            num_nodes,
            edges,
            num_relations,
            node_attrs,
            edge_attrs,
            graph_attrs,
        }
    }
}

fn check_rows(level: AttrLevel, table: &AttrTable, expected: usize) -> Result<()> {
    for (name, t) in table {
        let found = if t.rank() == 0 { 0 } else { t.rows() };
        if t.rank() == 0 || found != expected {
            return Err(GraphError::AttributeRows {
                level,
                name: name.clone(),
                expected,
                found,
            });
        }
    }
    Ok(())
}

fn select_table(table: &AttrTable, rows: &[usize]) -> Result<AttrTable> {
    table
        .iter()
        .map(|(k, v)| Ok((k.clone(), v.gather_rows(rows)?)))
        .collect()
}
