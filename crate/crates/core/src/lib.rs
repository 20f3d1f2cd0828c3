//! Graph machine learning for drug-discovery workloads.
//!
//! * [`tensor`]: dense tensors, reverse-mode differentiation, optimizers.
//! * [`graph`]: attributed graphs and their packed (batched) form.
//! * [`molecule`]: SMILES parsing and writing, featurization, scaffolds.
//! * [`kg`]: knowledge-graph embeddings, training and filtered ranking.
//! * [`gnn`]: GCN/GIN layers and molecular property prediction.

pub mod datasets;
pub mod gnn;
pub mod graph;
pub mod kg;
pub mod molecule;
pub mod tensor;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use graph::{Graph, PackedGraph};
pub use molecule::{Atom, BondType, Molecule};
pub use tensor::{Tape, Tensor, TensorError, Var};
