//! Reference model for attribute maintenance. Every node and edge carries a
//! unique sentinel; the model replays each structural operation on plain
//! sentinel lists, and the real graph must agree after every step.

use graphrx::graph::{Edge, Graph, PackedGraph};
use graphrx::Tensor;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct RefGraph {
    pub nodes: Vec<u32>,
    /// (head sentinel, tail sentinel, edge sentinel)
    pub edges: Vec<(u32, u32, u32)>,
    pub tag: u32,
}

impl RefGraph {
    pub fn node_mask(&self, keep: &[bool]) -> RefGraph {
        let order: Vec<usize> = (0..self.nodes.len()).filter(|&i| keep[i]).collect();
        self.subgraph(&order)
    }

    pub fn subgraph(&self, order: &[usize]) -> RefGraph {
        let nodes: Vec<u32> = order.iter().map(|&i| self.nodes[i]).collect();
        let edges = self
            .edges
            .iter()
            .filter(|(h, t, _)| nodes.contains(h) && nodes.contains(t))
            .copied()
            .collect();
        RefGraph {
            nodes,
            edges,
            tag: self.tag,
        }
    }

    pub fn edge_mask(&self, keep: &[bool]) -> RefGraph {
        RefGraph {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(e, _)| *e)
                .collect(),
            tag: self.tag,
        }
    }
}

/// Random graph whose node/edge/graph attributes are sentinels.
pub fn random_tagged_graph(rng: &mut ChaCha8Rng, max_nodes: usize, tag: u32) -> (Graph, RefGraph) {
    let n = rng.gen_range(0..=max_nodes);
    let m = if n == 0 { 0 } else { rng.gen_range(0..=2 * n) };
    let edges: Vec<Edge> = (0..m)
        .map(|_| Edge::new(rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect();
    let node_ids: Vec<u32> = (0..n as u32).map(|i| tag * 1000 + i).collect();
    let edge_ids: Vec<u32> = (0..m as u32).map(|i| tag * 1000 + 500 + i).collect();
    let ends: Vec<f32> = edges
        .iter()
        .flat_map(|e| [node_ids[e.head] as f32, node_ids[e.tail] as f32])
        .collect();
    let g = Graph::builder(n)
        .edges(edges.clone())
        .node_attr(
            "nid",
            Tensor::from_vec(node_ids.iter().map(|&v| v as f32).collect()),
        )
        .node_attr(
            "nfeat",
            Tensor::new(
                vec![n, 2],
                node_ids
                    .iter()
                    .flat_map(|&v| [v as f32, -(v as f32)])
                    .collect(),
            )
            .unwrap(),
        )
        .edge_attr(
            "eid",
            Tensor::from_vec(edge_ids.iter().map(|&v| v as f32).collect()),
        )
        .edge_attr("ends", Tensor::new(vec![m, 2], ends).unwrap())
        .graph_attr("tag", Tensor::from_vec(vec![tag as f32, 1.0]))
        .build()
        .unwrap();
    let r = RefGraph {
        nodes: node_ids.clone(),
        edges: edges
            .iter()
            .zip(&edge_ids)
            .map(|(e, &id)| (node_ids[e.head], node_ids[e.tail], id))
            .collect(),
        tag,
    };
    (g, r)
}

/// Reads the sentinel view of a real graph, checking every attribute row is
/// consistent with the structure it describes.
pub fn observe(g: &Graph) -> Result<RefGraph, String> {
    let nid = g.node_attr("nid").ok_or("nid missing")?.data();
    let nfeat = g.node_attr("nfeat").ok_or("nfeat missing")?;
    let eid = g.edge_attr("eid").ok_or("eid missing")?.data();
    let ends = g.edge_attr("ends").ok_or("ends missing")?;
    if nid.len() != g.num_nodes() || eid.len() != g.num_edges() {
        return Err("attribute row count drifted".into());
    }
    for (i, &id) in nid.iter().enumerate() {
        if nfeat.row(i) != [id, -id] {
            return Err(format!("node {i}: nfeat row misaligned"));
        }
    }
    let mut edges = Vec::new();
    for (i, e) in g.edges().iter().enumerate() {
        let (h, t) = (nid[e.head], nid[e.tail]);
        if ends.row(i) != [h, t] {
            return Err(format!(
                "edge {i}: ends row {:?} vs structure {:?}",
                ends.row(i),
                (h, t)
            ));
        }
        edges.push((h as u32, t as u32, eid[i] as u32));
    }
    let tag = g.graph_attr("tag").ok_or("tag missing")?.data();
    if tag[1] != 1.0 {
        return Err("graph attribute altered".into());
    }
    Ok(RefGraph {
        nodes: nid.iter().map(|&v| v as u32).collect(),
        edges,
        tag: tag[0] as u32,
    })
}

#[derive(Debug, Clone, Copy)]
pub enum Step {
    NodeMask,
    EdgeMask,
    Subgraph,
    PackUnpack,
    Repeat,
    Select,
}

/// Runs one random sequence of structural operations, comparing the real
/// batch to the reference model after every step.
pub fn run_sequence(rng: &mut ChaCha8Rng, steps: usize, max_nodes: usize) -> Result<(), String> {
    let count = rng.gen_range(1..=3);
    let (mut real, mut model): (Vec<Graph>, Vec<RefGraph>) = (0..count)
        .map(|t| random_tagged_graph(rng, max_nodes, t as u32 + 1))
        .unzip();
    let all = [
        Step::NodeMask,
        Step::EdgeMask,
        Step::Subgraph,
        Step::PackUnpack,
        Step::Repeat,
        Step::Select,
    ];
    for _ in 0..steps {
        let step = *all.choose(rng).unwrap();
        match step {
            Step::NodeMask | Step::EdgeMask | Step::Subgraph if !real.is_empty() => {
                let i = rng.gen_range(0..real.len());
                let g = &real[i];
                match step {
                    Step::NodeMask => {
                        let keep: Vec<bool> =
                            (0..g.num_nodes()).map(|_| rng.gen_bool(0.7)).collect();
                        real[i] = g.node_mask(&keep).map_err(|e| e.to_string())?;
                        model[i] = model[i].node_mask(&keep);
                    }
                    Step::EdgeMask => {
                        let keep: Vec<bool> =
                            (0..g.num_edges()).map(|_| rng.gen_bool(0.7)).collect();
                        real[i] = g.edge_mask(&keep).map_err(|e| e.to_string())?;
                        model[i] = model[i].edge_mask(&keep);
                    }
                    _ => {
                        let mut order: Vec<usize> = (0..g.num_nodes()).collect();
                        order.shuffle(rng);
                        order.truncate(rng.gen_range(0..=g.num_nodes()));
                        real[i] = g.subgraph(&order).map_err(|e| e.to_string())?;
                        model[i] = model[i].subgraph(&order);
                    }
                }
            }
            Step::PackUnpack => {
                let pg = PackedGraph::pack(&real).map_err(|e| e.to_string())?;
                check_packed(&pg)?;
                real = pg.unpack();
            }
            Step::Repeat => {
                let k = if real.len() * 2 > 8 {
                    rng.gen_range(0..=1)
                } else {
                    rng.gen_range(0..=2)
                };
                let pg = PackedGraph::pack(&real).map_err(|e| e.to_string())?;
                let r = pg.repeat(k);
                check_packed(&r)?;
                real = r.unpack();
                model = (0..k).flat_map(|_| model.clone()).collect();
            }
            Step::Select => {
                if real.is_empty() {
                    continue;
                }
                let len = rng.gen_range(0..=4);
                let which: Vec<usize> = (0..len).map(|_| rng.gen_range(0..real.len())).collect();
                let pg = PackedGraph::pack(&real).map_err(|e| e.to_string())?;
                let s = pg.select(&which).map_err(|e| e.to_string())?;
                check_packed(&s)?;
                real = s.unpack();
                model = which.iter().map(|&i| model[i].clone()).collect();
            }
            _ => {}
        }
        if real.len() != model.len() {
            return Err(format!(
                "{step:?}: {} graphs vs model {}",
                real.len(),
                model.len()
            ));
        }
        for (g, m) in real.iter().zip(&model) {
            let seen = observe(g).map_err(|e| format!("{step:?}: {e}"))?;
            if &seen != m {
                return Err(format!("{step:?}: graph diverged from the reference model"));
            }
        }
    }
    Ok(())
}

/// Packed-level invariants: offsets and per-edge ownership.
pub fn check_packed(pg: &PackedGraph) -> Result<(), String> {
    let no = pg.node_offsets();
    if no.first() != Some(&0) || no.windows(2).any(|w| w[0] > w[1]) {
        return Err("node offsets not monotone from 0".into());
    }
    for g in 0..pg.num_graphs() {
        let range = pg.node_range(g);
        for e in &pg.edges()[pg.edge_range(g)] {
            if !range.contains(&e.head) || !range.contains(&e.tail) {
                return Err(format!("edge {e:?} escapes member {g}"));
            }
        }
    }
    let ids = pg.node_graph_ids();
    if ids.windows(2).any(|w| w[0] > w[1]) || ids.len() != pg.num_nodes() {
        return Err("node_graph_ids not non-decreasing".into());
    }
    Ok(())
}
