//! Exhaustive attribute-preserving isomorphism check for small molecules.

use graphrx::molecule::{Atom, BondType, Molecule};

type Adj = Vec<Vec<Option<BondType>>>;

fn dense(m: &Molecule) -> Adj {
    let n = m.num_atoms();
    let mut adj = vec![vec![None; n]; n];
    for (a, b, t) in m.bonds() {
        adj[a][b] = Some(t);
        adj[b][a] = Some(t);
    }
    adj
}

/// Tries every injective atom mapping consistent with atom attributes,
/// extending one atom at a time and checking bonds to already mapped atoms.
pub fn isomorphic(a: &Molecule, b: &Molecule) -> bool {
    if a.num_atoms() != b.num_atoms() || a.num_bonds() != b.num_bonds() {
        return false;
    }
    let (aa, ba) = (a.atoms(), b.atoms());
    let (adj_a, adj_b) = (dense(a), dense(b));
    let mut map = vec![usize::MAX; aa.len()];
    let mut used = vec![false; aa.len()];
    extend(0, &aa, &ba, &adj_a, &adj_b, &mut map, &mut used)
}

fn extend(
    i: usize,
    aa: &[Atom],
    ba: &[Atom],
    adj_a: &Adj,
    adj_b: &Adj,
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    if i == aa.len() {
        return true;
    }
    for j in 0..ba.len() {
        if used[j] || aa[i] != ba[j] {
            continue;
        }
        if (0..i).any(|k| adj_a[i][k] != adj_b[j][map[k]]) {
            continue;
        }
        map[i] = j;
        used[j] = true;
        if extend(i + 1, aa, ba, adj_a, adj_b, map, used) {
            return true;
        }
        used[j] = false;
    }
    false
}

/// Sorted per-atom (element, charge, aromatic, H, degree, bond types).
pub fn invariants(m: &Molecule) -> Vec<(u8, i8, bool, u8, usize, Vec<BondType>)> {
    let adj = m.adjacency();
    let mut out: Vec<_> = m
        .atoms()
        .iter()
        .zip(&adj)
        .map(|(a, list)| {
            let mut types: Vec<BondType> = list.iter().map(|&(_, t)| t).collect();
            types.sort();
            (
                a.atomic_number,
                a.formal_charge,
                a.aromatic,
                a.implicit_hydrogens,
                list.len(),
                types,
            )
        })
        .collect();
    out.sort();
    out
}

/// Brute-force isomorphism up to 20 atoms, invariant multisets beyond.
pub fn equivalent(a: &Molecule, b: &Molecule) -> bool {
    if a.num_atoms() <= 20 {
        isomorphic(a, b)
    } else {
        invariants(a) == invariants(b)
    }
}
