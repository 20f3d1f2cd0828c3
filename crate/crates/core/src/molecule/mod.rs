//! Molecules as attributed graphs.
//!
//! A [`Molecule`] is a [`Graph`] with fixed node attributes (see the `ATTR_*`
//! constants, each a `[num_atoms]` tensor) and one edge attribute,
//! [`ATTR_BOND_TYPE`]. Bond `i` is stored as the directed edge pair
//! `(2i, 2i + 1)`, head-to-tail then tail-to-head, so the graph is already in
//! [`Graph::to_undirected`] form. Node masks and subgraphs keep pairs adjacent.

pub mod elements;
mod features;
mod ion;
mod scaffold;
pub mod smiles;
pub mod valence;
mod writer;

pub use features::{ATOM_FEATURES, BOND_FEATURES, ELEMENT_PALETTE, FEATURE_SCHEME};
pub use ion::IonChange;
pub use smiles::{ParsedSmiles, SmilesError, SmilesToken};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{AttrLevel, Edge, Graph, GraphError, PackedGraph};
use crate::tensor::Tensor;

pub const ATTR_ATOMIC_NUMBER: &str = "atomic_number";
pub const ATTR_FORMAL_CHARGE: &str = "formal_charge";
pub const ATTR_AROMATIC: &str = "aromatic";
pub const ATTR_IMPLICIT_HYDROGENS: &str = "implicit_hydrogens";
pub const ATTR_ISOTOPE: &str = "isotope";
pub const ATTR_BOND_TYPE: &str = "bond_type";

const NODE_ATTRS: [&str; 5] = [
    ATTR_ATOMIC_NUMBER,
    ATTR_FORMAL_CHARGE,
    ATTR_AROMATIC,
    ATTR_IMPLICIT_HYDROGENS,
    ATTR_ISOTOPE,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoleculeError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("missing {level} attribute `{name}`")]
    MissingAttribute {
        level: AttrLevel,
        name: &'static str,
    },
    #[error("edges {edge} and {} are not a matching bond pair", edge + 1)]
    UnpairedEdges { edge: usize },
    #[error("invalid bond type code {0}")]
    BondCode(f32),
    #[error("bond ({0}, {1}) is a self-loop or out of range")]
    BadBond(usize, usize),
}

pub type Result<T> = std::result::Result<T, MoleculeError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondType {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondType {
    pub const ALL: [BondType; 4] = [
        BondType::Single,
        BondType::Double,
        BondType::Triple,
        BondType::Aromatic,
    ];

    /// Value stored in the `bond_type` edge attribute.
    pub fn code(self) -> f32 {
        self as u8 as f32
    }

    pub fn from_code(code: f32) -> Option<Self> {
        Self::ALL.iter().copied().find(|b| b.code() == code)
    }

    pub fn symbol(self) -> char {
        match self {
            BondType::Single => '-',
            BondType::Double => '=',
            BondType::Triple => '#',
            BondType::Aromatic => ':',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Atom {
    pub atomic_number: u8,
    pub formal_charge: i8,
    pub aromatic: bool,
    pub implicit_hydrogens: u8,
    /// Mass number; 0 when unspecified.
    pub isotope: u16,
}

impl Atom {
    pub fn new(atomic_number: u8) -> Self {
        Self {
            atomic_number,
            ..Self::default()
        }
    }

    pub fn symbol(&self) -> &'static str {
        elements::symbol(self.atomic_number).unwrap_or("*")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    graph: Graph,
}

impl Molecule {
    pub fn new(atoms: &[Atom], bonds: &[(usize, usize, BondType)]) -> Result<Self> {
        let n = atoms.len();
        let mut edges = Vec::with_capacity(bonds.len() * 2);
        let mut codes = Vec::with_capacity(bonds.len() * 2);
        for &(a, b, t) in bonds {
            if a == b || a >= n || b >= n {
                return Err(MoleculeError::BadBond(a, b));
            }
            edges.push(Edge::new(a, b));
            edges.push(Edge::new(b, a));
            codes.extend([t.code(), t.code()]);
        }
        let column = |f: &dyn Fn(&Atom) -> f32| Tensor::from_vec(atoms.iter().map(f).collect());
        let graph = Graph::builder(n)
            .edges(edges)
            .node_attr(ATTR_ATOMIC_NUMBER, column(&|a| a.atomic_number as f32))
            .node_attr(ATTR_FORMAL_CHARGE, column(&|a| a.formal_charge as f32))
            .node_attr(ATTR_AROMATIC, column(&|a| a.aromatic as u8 as f32))
            .node_attr(
                ATTR_IMPLICIT_HYDROGENS,
                column(&|a| a.implicit_hydrogens as f32),
            )
            .node_attr(ATTR_ISOTOPE, column(&|a| a.isotope as f32))
            .edge_attr(ATTR_BOND_TYPE, Tensor::from_vec(codes))
            .build()?;
        Ok(Self { graph })
    }

    /// Wraps a graph that carries the molecule attributes, checking edge
    /// pairing and bond codes. Extra attributes are kept.
    pub fn from_graph(graph: Graph) -> Result<Self> {
        for name in NODE_ATTRS {
            if graph.node_attr(name).is_none() {
                return Err(MoleculeError::MissingAttribute {
                    level: AttrLevel::Node,
                    name,
                });
            }
        }
        let codes = graph
            .edge_attr(ATTR_BOND_TYPE)
            .ok_or(MoleculeError::MissingAttribute {
                level: AttrLevel::Edge,
                name: ATTR_BOND_TYPE,
            })?
            .data();
        let edges = graph.edges();
        if !edges.len().is_multiple_of(2) {
            return Err(MoleculeError::UnpairedEdges {
                edge: edges.len() - 1,
            });
        }
        for i in (0..edges.len()).step_by(2) {
            let (e, r) = (edges[i], edges[i + 1]);
            if e.head == e.tail || (e.head, e.tail) != (r.tail, r.head) || codes[i] != codes[i + 1]
            {
                return Err(MoleculeError::UnpairedEdges { edge: i });
            }
            BondType::from_code(codes[i]).ok_or(MoleculeError::BondCode(codes[i]))?;
        }
        Ok(Self { graph })
    }

    pub fn empty() -> Self {
        Self::new(&[], &[]).expect("empty molecule is valid")
    }

    pub fn from_smiles(s: &str) -> std::result::Result<Self, SmilesError> {
        let parsed = smiles::parse(s)?;
        for w in &parsed.warnings {
            log::warn!("{s}: {w}");
        }
        Ok(Self::new(&parsed.atoms, &parsed.bonds).expect("parser emits valid bonds"))
    }

    pub fn to_smiles(&self) -> String {
        writer::write(self)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn num_atoms(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn num_bonds(&self) -> usize {
        self.graph.num_edges() / 2
    }

    fn node_value(&self, name: &str, i: usize) -> f32 {
        self.graph
            .node_attr(name)
            .expect("checked on construction")
            .data()[i]
    }

    pub fn atom(&self, i: usize) -> Atom {
        Atom {
            atomic_number: self.node_value(ATTR_ATOMIC_NUMBER, i) as u8,
            formal_charge: self.node_value(ATTR_FORMAL_CHARGE, i) as i8,
            aromatic: self.node_value(ATTR_AROMATIC, i) != 0.0,
            implicit_hydrogens: self.node_value(ATTR_IMPLICIT_HYDROGENS, i) as u8,
            isotope: self.node_value(ATTR_ISOTOPE, i) as u16,
        }
    }

    pub fn atoms(&self) -> Vec<Atom> {
        (0..self.num_atoms()).map(|i| self.atom(i)).collect()
    }

    /// Bonds as `(head, tail, type)` in storage order.
    pub fn bonds(&self) -> Vec<(usize, usize, BondType)> {
        let codes = self
            .graph
            .edge_attr(ATTR_BOND_TYPE)
            .expect("checked")
            .data();
        self.graph
            .edges()
            .iter()
            .zip(codes)
            .step_by(2)
            .map(|(e, &c)| (e.head, e.tail, BondType::from_code(c).expect("checked")))
            .collect()
    }

    /// Per-atom list of `(neighbor, bond type)`, neighbors ascending.
    pub fn adjacency(&self) -> Vec<Vec<(usize, BondType)>> {
        let mut adj = vec![Vec::new(); self.num_atoms()];
        for (a, b, t) in self.bonds() {
            adj[a].push((b, t));
            adj[b].push((a, t));
        }
        for list in &mut adj {
            list.sort();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency().iter().map(Vec::len).collect()
    }

    /// Atoms whose bonds, hydrogens and charge do not hit an allowed valence.
    pub fn nonstandard_atoms(&self) -> Vec<usize> {
        let adj = self.adjacency();
        (0..self.num_atoms())
            .filter(|&i| {
                let a = self.atom(i);
                let bonds: Vec<BondType> = adj[i].iter().map(|&(_, t)| t).collect();
                !valence::is_standard(
                    a.atomic_number,
                    a.formal_charge,
                    a.aromatic,
                    a.implicit_hydrogens,
                    &bonds,
                )
            })
            .collect()
    }

    pub fn is_nonstandard(&self) -> bool {
        !self.nonstandard_atoms().is_empty()
    }

    /// Molecular formula in Hill order, with a trailing net charge.
    pub fn formula(&self) -> String {
        let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
        let mut hydrogens = 0;
        let mut charge = 0i32;
        for a in self.atoms() {
            *counts.entry(a.symbol()).or_default() += 1;
            hydrogens += a.implicit_hydrogens as u32;
            charge += a.formal_charge as i32;
        }
        if hydrogens > 0 {
            *counts.entry("H").or_default() += hydrogens;
        }
        let mut order: Vec<&str> = Vec::new();
        if counts.contains_key("C") {
            order.push("C");
            if counts.contains_key("H") {
                order.push("H");
            }
        }
        order.extend(
            counts
                .keys()
                .filter(|k| !order.contains(k))
                .copied()
                .collect::<Vec<_>>(),
        );
        let mut out = String::new();
        for sym in order {
            out.push_str(sym);
            if counts[sym] > 1 {
                out.push_str(&counts[sym].to_string());
            }
        }
        match charge {
            0 => {}
            1 => out.push('+'),
            -1 => out.push('-'),
            c if c > 0 => out.push_str(&format!("{c}+")),
            c => out.push_str(&format!("{}-", -c)),
        }
        out
    }

    pub fn node_mask(&self, keep: &[bool]) -> Result<Self> {
        Ok(Self {
            graph: self.graph.node_mask(keep)?,
        })
    }

    pub fn subgraph(&self, nodes: &[usize]) -> Result<Self> {
        Ok(Self {
            graph: self.graph.subgraph(nodes)?,
        })
    }

    pub fn split_components(&self) -> Result<Vec<Molecule>> {
        self.graph
            .split_components()?
            .unpack()
            .into_iter()
            .map(Molecule::from_graph)
            .collect()
    }

    pub fn featurize_atoms(&self) -> Tensor {
        features::atom_features(self)
    }

    pub fn featurize_bonds(&self) -> Tensor {
        features::bond_features(self)
    }

    pub fn murcko_scaffold(&self) -> Molecule {
        scaffold::murcko_scaffold(self)
    }

    pub fn ring_atoms(&self) -> Vec<bool> {
        scaffold::ring_atoms(self)
    }

    /// Neutralizes charged atoms by adding or removing hydrogens; see
    /// [`IonChange`] for the per-atom report.
    pub fn ion_to_molecule(&self) -> (Molecule, Vec<IonChange>) {
        ion::ion_to_molecule(self)
    }

    pub(crate) fn with_atoms(&self, atoms: &[Atom]) -> Molecule {
        debug_assert_eq!(atoms.len(), self.num_atoms());
        let mut graph = self.graph.clone();
        let column = |f: &dyn Fn(&Atom) -> f32| Tensor::from_vec(atoms.iter().map(f).collect());
        graph.set_node_attr(ATTR_FORMAL_CHARGE, column(&|a| a.formal_charge as f32));
        graph.set_node_attr(
            ATTR_IMPLICIT_HYDROGENS,
            column(&|a| a.implicit_hydrogens as f32),
        );
        Molecule { graph }
    }
}

impl From<Molecule> for Graph {
    fn from(m: Molecule) -> Graph {
        m.graph
    }
}

impl TryFrom<Graph> for Molecule {
    type Error = MoleculeError;

    fn try_from(g: Graph) -> Result<Molecule> {
        Molecule::from_graph(g)
    }
}

/// Parses one SMILES per line into a packed batch in input order. The first
/// failing line (1-based) aborts the whole batch.
pub fn from_smiles_batch<S: AsRef<str>>(
    lines: &[S],
) -> std::result::Result<PackedGraph, SmilesError> {
    let mut graphs = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let m = Molecule::from_smiles(line.as_ref()).map_err(|e| SmilesError::Line {
            line: i + 1,
            source: Box::new(e),
        })?;
        graphs.push(m.into_graph());
    }
    let schema = Molecule::empty().graph().schema();
    Ok(PackedGraph::pack_with_schema(&graphs, schema).expect("molecules share one schema"))
}

/// Unpacks a batch of molecules.
pub fn unpack_molecules(batch: &PackedGraph) -> Result<Vec<Molecule>> {
    batch
        .unpack()
        .into_iter()
        .map(Molecule::from_graph)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hydrogens(m: &Molecule) -> Vec<u8> {
        m.atoms().iter().map(|a| a.implicit_hydrogens).collect()
    }

    #[test]
    fn carbamate() {
        let m = Molecule::from_smiles("CCOC(=O)N").unwrap();
        assert_eq!((m.num_atoms(), m.num_bonds()), (6, 5));
        let z: Vec<u8> = m.atoms().iter().map(|a| a.atomic_number).collect();
        assert_eq!(z, [6, 6, 8, 6, 8, 7]);
        let doubles: Vec<_> = m
            .bonds()
            .into_iter()
            .filter(|b| b.2 == BondType::Double)
            .collect();
        assert_eq!(doubles, [(3, 4, BondType::Double)]);
        assert_eq!(hydrogens(&m), [3, 2, 0, 0, 0, 2]);
        assert!(!m.is_nonstandard());
        assert_eq!(m.graph().num_edges(), 10);
    }

    #[test]
    fn nicotinamide() {
        let m = Molecule::from_smiles("NC(=O)c1cccnc1").unwrap();
        assert_eq!((m.num_atoms(), m.num_bonds()), (9, 9));
        let ring: Vec<Atom> = m.atoms().into_iter().filter(|a| a.aromatic).collect();
        assert_eq!(ring.len(), 6);
        assert_eq!(ring.iter().filter(|a| a.atomic_number == 7).count(), 1);
        let aromatic = m
            .bonds()
            .iter()
            .filter(|b| b.2 == BondType::Aromatic)
            .count();
        assert_eq!(aromatic, 6);
        assert_eq!(hydrogens(&m), [2, 0, 0, 0, 1, 1, 1, 0, 1]);
    }

    #[test]
    fn salt() {
        let m = Molecule::from_smiles("[Na+].[Cl-]").unwrap();
        assert_eq!((m.num_atoms(), m.num_bonds()), (2, 0));
        let charges: Vec<i8> = m.atoms().iter().map(|a| a.formal_charge).collect();
        assert_eq!(charges, [1, -1]);
        assert_eq!(m.split_components().unwrap().len(), 2);
        assert_eq!(m.formula(), "ClNa");
    }

    #[test]
    fn formula_hill_order() {
        assert_eq!(Molecule::from_smiles("CCO").unwrap().formula(), "C2H6O");
        assert_eq!(Molecule::from_smiles("[NH4+]").unwrap().formula(), "H4N+");
        assert_eq!(Molecule::from_smiles("C").unwrap().formula(), "CH4");
    }

    #[test]
    fn batch_examples() {
        let smiles = [
            "CCSCCSP(=S)(OC)OC",
            "CCOC(=O)N",
            "N(Nc1ccccc1)c2ccccc2",
            "NC(=O)c1cccnc1",
        ];
        let batch = from_smiles_batch(&smiles).unwrap();
        assert_eq!(batch.num_graphs(), 4);
        assert_eq!(batch.repeat(2).num_graphs(), 8);
        let empty = from_smiles_batch::<&str>(&[]).unwrap();
        assert_eq!(empty.num_graphs(), 0);
        let err = from_smiles_batch(&["CC", "C(C", "O"]).unwrap_err();
        assert!(matches!(err, SmilesError::Line { line: 2, .. }));
    }

    #[test]
    fn from_graph_rejects_unpaired_edges() {
        let m = Molecule::from_smiles("CCO").unwrap();
        let broken = m.graph().edge_mask(&[true, false, true, false]).unwrap();
        assert!(matches!(
            Molecule::from_graph(broken),
            Err(MoleculeError::UnpairedEdges { edge: 0 })
        ));
        let masked = m.node_mask(&[false, true, true]).unwrap();
        assert_eq!(masked.num_bonds(), 1);
    }

    #[test]
    fn nonstandard_flagged_not_rejected() {
        let m = Molecule::from_smiles("[CH5]").unwrap();
        assert_eq!(m.nonstandard_atoms(), [0]);
        assert!(!Molecule::from_smiles("[O-]C=O").unwrap().is_nonstandard());
    }
}
