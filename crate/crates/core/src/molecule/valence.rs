//! Valence accounting.
//!
//! Aromatic bonds are not kekulized. An atom with `a ≥ 2` aromatic bonds is
//! credited `a + 1` bond orders for them (two ring bonds of an alternating
//! ring sum to 3); a lone aromatic bond counts 1. Aromatic atoms whose lowest
//! valence is already used up by the plain count `a` (furan `o`, thiophene
//! `s`, a ring carbon with an exocyclic `=O`) are accepted at that count.

use super::elements;
use super::BondType;

/// Bond order credited to the non-aromatic bonds plus the aromatic ones.
pub fn explicit_valence(bonds: &[BondType]) -> u32 {
    let (plain, aromatic) = split(bonds);
    plain + aromatic_credit(aromatic)
}

fn split(bonds: &[BondType]) -> (u32, u32) {
    let mut plain = 0;
    let mut aromatic = 0;
    for b in bonds {
        match b {
            BondType::Single => plain += 1,
            BondType::Double => plain += 2,
            BondType::Triple => plain += 3,
            BondType::Aromatic => aromatic += 1,
        }
    }
    (plain, aromatic)
}

fn aromatic_credit(aromatic: u32) -> u32 {
    if aromatic >= 2 {
        aromatic + 1
    } else {
        aromatic
    }
}

/// Candidate explicit valences, preferred first.
fn candidates(aromatic_atom: bool, bonds: &[BondType]) -> Vec<u32> {
    let (plain, aromatic) = split(bonds);
    let full = plain + aromatic_credit(aromatic);
    let low = plain + aromatic;
    if aromatic_atom && low != full {
        vec![full, low]
    } else {
        vec![full]
    }
}

/// Implicit hydrogen count for an unbracketed atom of a neutral organic
/// element; `None` when every allowed valence is exceeded.
pub fn default_hydrogens(atomic_number: u8, aromatic: bool, bonds: &[BondType]) -> Option<u8> {
    let Some(allowed) = elements::neutral_valences(atomic_number) else {
        return Some(0);
    };
    let cands = candidates(aromatic, bonds);
    if aromatic {
        let lowest = allowed[0] as u32;
        if let Some(&c) = cands.iter().find(|&&c| c <= lowest) {
            return Some((lowest - c) as u8);
        }
    }
    for &c in &cands {
        if let Some(&v) = allowed.iter().find(|&&v| v as u32 >= c) {
            return Some((v as u32 - c) as u8);
        }
    }
    None
}

/// Whether bonds plus hydrogens hit an allowed valence for the charged atom.
/// Elements without a valence model always pass.
pub fn is_standard(
    atomic_number: u8,
    charge: i8,
    aromatic: bool,
    hydrogens: u8,
    bonds: &[BondType],
) -> bool {
    let Some(allowed) = elements::charged_valences(atomic_number, charge) else {
        return true;
    };
    candidates(aromatic, bonds)
        .iter()
        .any(|&c| allowed.contains(&((c + hydrogens as u32).min(255) as u8)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use BondType::*;

    #[test]
    fn aliphatic_hydrogens() {
        assert_eq!(default_hydrogens(6, false, &[]), Some(4));
        assert_eq!(default_hydrogens(6, false, &[Single, Double]), Some(1));
        assert_eq!(default_hydrogens(7, false, &[Triple]), Some(0));
        assert_eq!(
            default_hydrogens(16, false, &[Double, Double, Single]),
            Some(1)
        );
        assert_eq!(
            default_hydrogens(15, false, &[Double, Single, Single, Single]),
            Some(0)
        );
        assert_eq!(default_hydrogens(8, false, &[Single, Single, Single]), None);
    }

    #[test]
    fn aromatic_hydrogens() {
        assert_eq!(default_hydrogens(6, true, &[Aromatic, Aromatic]), Some(1));
        assert_eq!(
            default_hydrogens(6, true, &[Aromatic, Aromatic, Aromatic]),
            Some(0)
        );
        assert_eq!(
            default_hydrogens(6, true, &[Aromatic, Aromatic, Single]),
            Some(0)
        );
        assert_eq!(
            default_hydrogens(6, true, &[Aromatic, Aromatic, Double]),
            Some(0)
        );
        assert_eq!(default_hydrogens(7, true, &[Aromatic, Aromatic]), Some(0));
        assert_eq!(default_hydrogens(8, true, &[Aromatic, Aromatic]), Some(0));
        assert_eq!(default_hydrogens(16, true, &[Aromatic, Aromatic]), Some(0));
    }

    #[test]
    fn charged_atoms_checked_against_shifted_valences() {
        assert!(is_standard(7, 1, false, 4, &[]));
        assert!(!is_standard(7, 0, false, 4, &[]));
        assert!(is_standard(8, -1, false, 0, &[Single]));
        assert!(is_standard(7, 0, true, 1, &[Aromatic, Aromatic]));
        assert!(is_standard(11, 1, false, 0, &[]));
    }
}
