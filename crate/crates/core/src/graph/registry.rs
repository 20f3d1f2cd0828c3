use std::collections::BTreeMap;

use super::{AttrLevel, AttrTable, Graph, GraphError, Result};
use crate::tensor::Tensor;

/// Attribute names and trailing shapes per level, plus the relation vocabulary
/// size. Two graphs can be packed together only if their schemas are equal.
/// Node and edge entries store the shape after the leading row extent; graph
/// entries store the full shape.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schema {
    pub num_relations: Option<usize>,
    pub node: BTreeMap<String, Vec<usize>>,
    pub edge: BTreeMap<String, Vec<usize>>,
    pub graph: BTreeMap<String, Vec<usize>>,
}

fn suffixes(table: &AttrTable) -> BTreeMap<String, Vec<usize>> {
    table
        .iter()
        .map(|(k, v)| (k.clone(), v.shape()[1..].to_vec()))
        .collect()
}

impl Schema {
    pub fn of_graph(g: &Graph) -> Self {
        Self {
            num_relations: g.num_relations(),
            node: suffixes(g.node_attrs()),
            edge: suffixes(g.edge_attrs()),
            graph: g
                .graph_attrs()
                .iter()
                .map(|(k, v)| (k.clone(), v.shape().to_vec()))
                .collect(),
        }
    }

    pub fn level(&self, level: AttrLevel) -> &BTreeMap<String, Vec<usize>> {
        match level {
            AttrLevel::Node => &self.node,
            AttrLevel::Edge => &self.edge,
            AttrLevel::Graph => &self.graph,
        }
    }

    /// `Ok` when equal, otherwise an error naming the first differing attribute.
    pub fn ensure_matches(&self, other: &Schema) -> Result<()> {
        if self.num_relations != other.num_relations {
            return Err(GraphError::Schema {
                level: AttrLevel::Edge,
                name: "relation".into(),
                detail: format!(
                    "relation vocabularies {:?} and {:?}",
                    self.num_relations, other.num_relations
                ),
            });
        }
        for level in [AttrLevel::Node, AttrLevel::Edge, AttrLevel::Graph] {
            let (a, b) = (self.level(level), other.level(level));
            for name in a.keys().chain(b.keys()) {
                match (a.get(name), b.get(name)) {
                    (Some(x), Some(y)) if x == y => {}
                    (Some(x), Some(y)) => {
                        return Err(GraphError::Schema {
                            level,
                            name: name.clone(),
                            detail: format!("shapes {x:?} and {y:?}"),
                        })
                    }
                    _ => {
                        return Err(GraphError::Schema {
                            level,
                            name: name.clone(),
                            detail: "present in only one graph".into(),
                        })
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttrSpec {
    pub shape: Vec<usize>,
    pub default: f32,
}

/// User-registered attributes with default fill values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttributeRegistry {
    specs: BTreeMap<(AttrLevel, String), AttrSpec>,
}

impl AttributeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `shape` is the per-row shape for node/edge attributes, the full shape for graph ones.
    pub fn register(
        &mut self,
        level: AttrLevel,
        name: impl Into<String>,
        shape: &[usize],
        default: f32,
    ) -> Result<()> {
        let name = name.into();
        let key = (level, name.clone());
        if self.specs.contains_key(&key) {
            return Err(GraphError::DuplicateAttribute { level, name });
        }
        self.specs.insert(
            key,
            AttrSpec {
                shape: shape.to_vec(),
                default,
            },
        );
        Ok(())
    }

    pub fn get(&self, level: AttrLevel, name: &str) -> Option<&AttrSpec> {
        self.specs.get(&(level, name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (AttrLevel, &str, &AttrSpec)> {
        self.specs.iter().map(|((l, n), s)| (*l, n.as_str(), s))
    }

    fn expected_shape(g: &Graph, level: AttrLevel, spec: &AttrSpec) -> Vec<usize> {
        let rows = match level {
            AttrLevel::Node => g.num_nodes(),
            AttrLevel::Edge => g.num_edges(),
            AttrLevel::Graph => return spec.shape.clone(),
        };
        let mut shape = vec![rows];
        shape.extend_from_slice(&spec.shape);
        shape
    }

    /// Adds every missing registered attribute filled with its default.
    /// Existing attributes must already have the registered shape.
    pub fn apply(&self, g: &Graph) -> Result<Graph> {
        let mut out = g.clone();
        for (level, name, spec) in self.iter() {
            let shape = Self::expected_shape(g, level, spec);
            match g.attrs(level).get(name) {
                Some(t) if t.shape() == shape.as_slice() => {}
                Some(t) => {
                    return Err(GraphError::Schema {
                        level,
                        name: name.to_string(),
                        detail: format!("registered shape {:?}, found {:?}", shape, t.shape()),
                    })
                }
                None => out = out.with_attr(level, name, Tensor::full(&shape, spec.default))?,
            }
        }
        Ok(out)
    }

    /// Whether `g` carries every registered attribute with its registered shape.
    pub fn is_claimed_by(&self, g: &Graph) -> bool {
        self.iter().all(|(level, name, spec)| {
            g.attrs(level)
                .get(name)
                .is_some_and(|t| t.shape() == Self::expected_shape(g, level, spec).as_slice())
        })
    }
}
