use super::{valence, BondType, Molecule};

/// What [`Molecule::ion_to_molecule`] did to one atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IonChange {
    /// Neutral atom; nothing to do.
    Neutral,
    /// Charge cleared by adding (`hydrogens > 0`) or removing hydrogens.
    Neutralized { charge: i8, hydrogens: i8 },
    /// Charged atom with no hydrogen-based fix, left as is.
    NotNeutralizable { charge: i8 },
}

pub(super) fn ion_to_molecule(m: &Molecule) -> (Molecule, Vec<IonChange>) {
    let adj = m.adjacency();
    let mut atoms = m.atoms();
    let mut report = Vec::with_capacity(atoms.len());
    for (atom, list) in atoms.iter_mut().zip(&adj) {
        let charge = atom.formal_charge;
        let bonds: Vec<BondType> = list.iter().map(|&(_, t)| t).collect();
        let change = if charge == 0 {
            IonChange::Neutral
        } else if charge < 0 {
            let added = atom.implicit_hydrogens as i32 - charge as i32;
            let fits = added <= u8::MAX as i32
                && valence::is_standard(atom.atomic_number, 0, atom.aromatic, added as u8, &bonds);
            if fits {
                atom.implicit_hydrogens = added as u8;
                atom.formal_charge = 0;
                IonChange::Neutralized {
                    charge,
                    hydrogens: -charge,
                }
            } else {
                IonChange::NotNeutralizable { charge }
            }
        } else if atom.implicit_hydrogens as i32 >= charge as i32 {
            atom.implicit_hydrogens -= charge as u8;
            atom.formal_charge = 0;
            IonChange::Neutralized {
                charge,
                hydrogens: -charge,
            }
        } else {
            IonChange::NotNeutralizable { charge }
        };
        report.push(change);
    }
    (m.with_atoms(&atoms), report)
}
