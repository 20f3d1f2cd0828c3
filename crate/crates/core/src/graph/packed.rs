use std::ops::Range;

use super::{AttrTable, Edge, Graph, GraphError, Result, Schema};
use crate::tensor::Tensor;

/// Several graphs concatenated into one structure.
///
/// Edges use global node indices, so message passing over the whole batch is a
/// single gather/scatter. Node and edge attribute rows are concatenated in
/// member order; graph attributes are stacked under a leading batch axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedGraph {
    node_offsets: Vec<usize>,
    edge_offsets: Vec<usize>,
    edges: Vec<Edge>,
    node_attrs: AttrTable,
    edge_attrs: AttrTable,
    graph_attrs: AttrTable,
    schema: Schema,
}

impl PackedGraph {
    /// Packs graphs sharing one schema. An empty input gives an empty batch
    /// with an empty schema.
    pub fn pack(graphs: &[Graph]) -> Result<Self> {
        let schema = graphs.first().map(Graph::schema).unwrap_or_default();
        Self::pack_with_schema(graphs, schema)
    }

    /// Like [`PackedGraph::pack`] but with an explicit schema, which also
    /// shapes the attribute tables of an empty batch.
    pub fn pack_with_schema(graphs: &[Graph], schema: Schema) -> Result<Self> {
        for g in graphs {
            schema.ensure_matches(&g.schema())?;
        }
        let mut node_offsets = Vec::with_capacity(graphs.len() + 1);
        let mut edge_offsets = Vec::with_capacity(graphs.len() + 1);
        node_offsets.push(0);
        edge_offsets.push(0);
        let mut edges = Vec::with_capacity(graphs.iter().map(Graph::num_edges).sum());
        for g in graphs {
            let base = *node_offsets.last().unwrap();
            edges.extend(g.edges().iter().map(|e| Edge {
                head: e.head + base,
                tail: e.tail + base,
                relation: e.relation,
            }));
            node_offsets.push(base + g.num_nodes());
            edge_offsets.push(edge_offsets.last().unwrap() + g.num_edges());
        }
        let concat = |names: &std::collections::BTreeMap<String, Vec<usize>>,
                      pick: &dyn Fn(&Graph) -> &AttrTable|
         -> Result<AttrTable> {
            names
                .iter()
                .map(|(name, suffix)| {
                    let parts: Vec<&Tensor> = graphs.iter().map(|g| &pick(g)[name]).collect();
                    Ok((name.clone(), Tensor::concat_rows(&parts, suffix)?))
                })
                .collect()
        };
        let node_attrs = concat(&schema.node, &|g| g.node_attrs())?;
        let edge_attrs = concat(&schema.edge, &|g| g.edge_attrs())?;
        let graph_attrs = schema
            .graph
            .iter()
            .map(|(name, shape)| {
                let parts: Vec<&Tensor> = graphs.iter().map(|g| &g.graph_attrs()[name]).collect();
                Ok((name.clone(), Tensor::stack(&parts, shape)?))
            })
            .collect::<Result<AttrTable>>()?;
        Ok(Self {
            node_offsets,
            edge_offsets,
            edges,
            node_attrs,
            edge_attrs,
            graph_attrs,
            schema,
        })
    }

    pub fn num_graphs(&self) -> usize {
        self.node_offsets.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        *self.node_offsets.last().unwrap()
    }

    pub fn num_edges(&self) -> usize {
        *self.edge_offsets.last().unwrap()
    }

    pub fn node_offsets(&self) -> &[usize] {
        &self.node_offsets
    }

    pub fn edge_offsets(&self) -> &[usize] {
        &self.edge_offsets
    }

    /// Edges with global node indices.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
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

    pub fn node_range(&self, g: usize) -> Range<usize> {
        self.node_offsets[g]..self.node_offsets[g + 1]
    }

    pub fn edge_range(&self, g: usize) -> Range<usize> {
        self.edge_offsets[g]..self.edge_offsets[g + 1]
    }

    pub fn num_nodes_per_graph(&self) -> Vec<usize> {
        self.node_offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Member `g` with local node indices restored.
    pub fn member(&self, g: usize) -> Result<Graph> {
        if g >= self.num_graphs() {
            return Err(GraphError::GraphIndex {
                index: g,
                len: self.num_graphs(),
            });
        }
        let nodes = self.node_range(g);
        let edge_range = self.edge_range(g);
        let base = nodes.start;
        let edges = self.edges[edge_range.clone()]
            .iter()
            .map(|e| Edge {
                head: e.head - base,
                tail: e.tail - base,
                relation: e.relation,
            })
            .collect();
        let slice = |t: &AttrTable, r: &Range<usize>| -> AttrTable {
            t.iter()
                .map(|(k, v)| (k.clone(), v.slice_rows(r.start, r.end)))
                .collect()
        };
        let graph_attrs = self
            .graph_attrs
            .iter()
            .map(|(k, v)| {
                let shape = &self.schema.graph[k];
                Ok((k.clone(), v.slice_rows(g, g + 1).reshape(shape)?))
            })
            .collect::<Result<AttrTable>>()?;
        Ok(Graph::from_parts(
            nodes.len(),
            edges,
            self.schema.num_relations,
            slice(&self.node_attrs, &nodes),
            slice(&self.edge_attrs, &edge_range),
            graph_attrs,
        ))
    }

    pub fn unpack(&self) -> Vec<Graph> {
        (0..self.num_graphs())
            .map(|g| self.member(g).expect("member index in range"))
            .collect()
    }

    /// New batch of the chosen members, in the given order; repeats allowed.
    pub fn select(&self, which: &[usize]) -> Result<Self> {
        let members = which
            .iter()
            .map(|&g| self.member(g))
            .collect::<Result<Vec<_>>>()?;
        Self::pack_with_schema(&members, self.schema.clone())
    }

    /// Whole-batch repetition: `[a, b]` repeated twice is `[a, b, a, b]`.
    pub fn repeat(&self, k: usize) -> Self {
        let n = self.num_graphs();
        let order: Vec<usize> = (0..k).flat_map(|_| 0..n).collect();
        self.select(&order).expect("indices in range")
    }

    /// Owning member index for every node; non-decreasing.
    pub fn node_graph_ids(&self) -> Vec<usize> {
        let mut ids = Vec::with_capacity(self.num_nodes());
        for (g, w) in self.node_offsets.windows(2).enumerate() {
            ids.extend(std::iter::repeat_n(g, w[1] - w[0]));
        }
        ids
    }

    /// Applies `f` to every member and repacks.
    pub fn map_members(&self, mut f: impl FnMut(usize, &Graph) -> Result<Graph>) -> Result<Self> {
        let members = self
            .unpack()
            .iter()
            .enumerate()
            .map(|(i, g)| f(i, g))
            .collect::<Result<Vec<_>>>()?;
        match members.first() {
            Some(first) => {
                let schema = first.schema();
                Self::pack_with_schema(&members, schema)
            }
            None => Ok(self.clone()),
        }
    }

    /// Batched node mask over global node indices; every member keeps its slot.
    pub fn node_mask(&self, keep: &[bool]) -> Result<Self> {
        if keep.len() != self.num_nodes() {
            return Err(GraphError::MaskLength {
                expected: self.num_nodes(),
                found: keep.len(),
            });
        }
        self.map_members(|i, g| g.node_mask(&keep[self.node_range(i)]))
    }

    /// Batched edge mask over global edge indices.
    pub fn edge_mask(&self, keep: &[bool]) -> Result<Self> {
        if keep.len() != self.num_edges() {
            return Err(GraphError::MaskLength {
                expected: self.num_edges(),
                found: keep.len(),
            });
        }
        self.map_members(|i, g| g.edge_mask(&keep[self.edge_range(i)]))
    }

    /// The whole batch as one disconnected graph; graph attributes are dropped.
    pub fn to_graph(&self) -> Graph {
        Graph::from_parts(
            self.num_nodes(),
            self.edges.clone(),
            self.schema.num_relations,
            self.node_attrs.clone(),
            self.edge_attrs.clone(),
            AttrTable::new(),
        )
    }
}
