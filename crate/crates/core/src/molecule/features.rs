//! Fixed-layout atom and bond features.
//!
//! Atom rows: element one-hot over [`ELEMENT_PALETTE`] plus an "other" slot
//! (16), formal charge one-hot over -2..=2 clipped (5), aromatic flag (1),
//! implicit-H one-hot 0..=4 clipped (5), degree one-hot 0..=5 clipped (6).

use super::{BondType, Molecule, ATTR_BOND_TYPE};
use crate::tensor::Tensor;

/// Atomic numbers of B C N O F Si P S Cl Br I Na K Li Ca.
pub const ELEMENT_PALETTE: [u8; 15] = [5, 6, 7, 8, 9, 14, 15, 16, 17, 35, 53, 11, 19, 3, 20];

pub const ATOM_FEATURES: usize = 16 + 5 + 1 + 5 + 6;
pub const BOND_FEATURES: usize = 4;

/// Identifies this feature layout in persisted models. Bump on any change.
pub const FEATURE_SCHEME: &str = "atom33/1";

const CHARGE: usize = 16;
const AROMATIC: usize = 21;
const HYDROGENS: usize = 22;
const DEGREE: usize = 27;

pub(super) fn atom_features(m: &Molecule) -> Tensor {
    let degrees = m.degrees();
    let mut data = vec![0.0; m.num_atoms() * ATOM_FEATURES];
    for (i, row) in data.chunks_mut(ATOM_FEATURES).enumerate() {
        let a = m.atom(i);
        let element = ELEMENT_PALETTE
            .iter()
            .position(|&z| z == a.atomic_number)
            .unwrap_or(ELEMENT_PALETTE.len());
        row[element] = 1.0;
        row[CHARGE + (a.formal_charge.clamp(-2, 2) + 2) as usize] = 1.0;
        row[AROMATIC] = a.aromatic as u8 as f32;
        row[HYDROGENS + a.implicit_hydrogens.min(4) as usize] = 1.0;
        row[DEGREE + degrees[i].min(5)] = 1.0;
    }
    Tensor::new(vec![m.num_atoms(), ATOM_FEATURES], data).expect("sized above")
}

/// One row per directed edge, aligned with the graph's edge order.
pub(super) fn bond_features(m: &Molecule) -> Tensor {
    let codes = m.graph().edge_attr(ATTR_BOND_TYPE).expect("checked").data();
    let mut data = vec![0.0; codes.len() * BOND_FEATURES];
    for (row, &c) in data.chunks_mut(BOND_FEATURES).zip(codes) {
        row[BondType::from_code(c).expect("checked") as usize] = 1.0;
    }
    Tensor::new(vec![codes.len(), BOND_FEATURES], data).expect("sized above")
}
