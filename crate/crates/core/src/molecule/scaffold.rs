use super::{BondType, Molecule};

/// Atoms lying on a cycle: endpoints of a bond that is not a bridge.
pub(super) fn ring_atoms(m: &Molecule) -> Vec<bool> {
    let n = m.num_atoms();
    let adj = m.adjacency();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut in_ring = vec![false; n];
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // Iterative Tarjan bridge search: (node, parent, next neighbor slot).
        let mut stack = vec![(root, usize::MAX, 0usize)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(&mut (u, parent, ref mut next)) = stack.last_mut() {
            if let Some(&(v, _)) = adj[u].get(*next) {
                *next += 1;
                if disc[v] == usize::MAX {
                    disc[v] = time;
                    low[v] = time;
                    time += 1;
                    stack.push((v, u, 0));
                } else if v != parent {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    low[parent] = low[parent].min(low[u]);
                }
            }
        }
    }
    for (a, b, _) in m.bonds() {
        let (p, c) = if disc[a] < disc[b] { (a, b) } else { (b, a) };
        let bridge = low[c] > disc[p];
        if !bridge {
            in_ring[a] = true;
            in_ring[b] = true;
        }
    }
    in_ring
}

/// Repeatedly removes non-ring atoms with at most one neighbor. Surviving
/// atoms gain one implicit hydrogen per bond order lost (aromatic counts 1),
/// so the scaffold stays valence-consistent.
pub(super) fn murcko_scaffold(m: &Molecule) -> Molecule {
    let ring = ring_atoms(m);
    let adj = m.adjacency();
    let mut alive = vec![true; m.num_atoms()];
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut queue: Vec<usize> = (0..m.num_atoms())
        .filter(|&i| !ring[i] && degree[i] <= 1)
        .collect();
    while let Some(u) = queue.pop() {
        if !alive[u] {
            continue;
        }
        alive[u] = false;
        for &(v, _) in &adj[u] {
            if alive[v] {
                degree[v] -= 1;
                if !ring[v] && degree[v] <= 1 {
                    queue.push(v);
                }
            }
        }
    }
    let mut atoms = m.atoms();
    for (u, list) in adj.iter().enumerate() {
        if !alive[u] {
            continue;
        }
        for &(v, t) in list {
            if !alive[v] {
                let order = match t {
                    BondType::Single | BondType::Aromatic => 1,
                    BondType::Double => 2,
                    BondType::Triple => 3,
                };
                atoms[u].implicit_hydrogens += order;
            }
        }
    }
    m.with_atoms(&atoms)
        .node_mask(&alive)
        .expect("mask sized to atoms")
}
