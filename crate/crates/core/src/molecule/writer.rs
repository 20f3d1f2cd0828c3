//! Deterministic (non-canonical) SMILES output.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::elements;
use super::valence;
use super::{Atom, BondType, Molecule};

struct Writer<'a> {
    atoms: Vec<Atom>,
    adj: &'a [Vec<(usize, BondType)>],
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<(usize, BondType)>>,
    /// Ring closures opened at an atom: (partner, bond type).
    opens: Vec<Vec<(usize, BondType)>>,
    /// Ring closures closed at an atom: partners.
    closes: Vec<Vec<usize>>,
    digit_of: Vec<Vec<(usize, u16)>>,
    free: BTreeSet<u16>,
    out: String,
}

pub fn write(m: &Molecule) -> String {
    let adj = m.adjacency();
    let n = m.num_atoms();
    let mut w = Writer {
        atoms: m.atoms(),
        adj: &adj,
        order: vec![usize::MAX; n],
        parent: vec![None; n],
        children: vec![Vec::new(); n],
        opens: vec![Vec::new(); n],
        closes: vec![Vec::new(); n],
        digit_of: vec![Vec::new(); n],
        free: (1..=99).collect(),
        out: String::new(),
    };
    let mut counter = 0;
    for root in 0..n {
        if w.order[root] != usize::MAX {
            continue;
        }
        w.explore(root, &mut counter);
        if !w.out.is_empty() {
            w.out.push('.');
        }
        w.emit(root);
    }
    w.out
}

impl Writer<'_> {
    fn explore(&mut self, u: usize, counter: &mut usize) {
        self.order[u] = *counter;
        *counter += 1;
        for &(v, t) in &self.adj[u] {
            if self.order[v] == usize::MAX {
                self.parent[v] = Some(u);
                self.children[u].push((v, t));
                self.explore(v, counter);
            } else if self.parent[u] != Some(v) && self.order[v] < self.order[u] {
                self.opens[v].push((u, t));
                self.closes[u].push(v);
            }
        }
    }

    fn emit(&mut self, u: usize) {
        let atom = self.atoms[u];
        let bonds: Vec<BondType> = self.adj[u].iter().map(|&(_, t)| t).collect();
        write_atom(&mut self.out, &atom, &bonds);

        let mut opens = std::mem::take(&mut self.opens[u]);
        opens.sort_by_key(|&(v, _)| self.order[v]);
        let mut released = Vec::new();
        let mut labels = Vec::new();
        for &v in &self.closes[u] {
            let pos = self.digit_of[v]
                .iter()
                .position(|&(w, _)| w == u)
                .expect("opened");
            let (_, d) = self.digit_of[v].remove(pos);
            labels.push((String::new(), d));
            released.push(d);
        }
        for &(v, t) in &opens {
            let d = self.free.pop_first().expect("fewer than 100 open rings");
            self.digit_of[u].push((v, d));
            let sym = bond_symbol(t, &atom, &self.atoms[v]);
            labels.push((sym.map(String::from).unwrap_or_default(), d));
        }
        self.free.extend(released);
        for (sym, d) in labels {
            self.out.push_str(&sym);
            if d < 10 {
                write!(self.out, "{d}").unwrap();
            } else {
                write!(self.out, "%{d}").unwrap();
            }
        }

        let children = std::mem::take(&mut self.children[u]);
        for (k, &(v, t)) in children.iter().enumerate() {
            let branch = k + 1 < children.len();
            if branch {
                self.out.push('(');
            }
            if let Some(s) = bond_symbol(t, &atom, &self.atoms[v]) {
                self.out.push(s);
            }
            self.emit(v);
            if branch {
                self.out.push(')');
            }
        }
    }
}

fn bond_symbol(t: BondType, a: &Atom, b: &Atom) -> Option<char> {
    let both_aromatic = a.aromatic && b.aromatic;
    match t {
        BondType::Single if both_aromatic => Some('-'),
        BondType::Single => None,
        BondType::Aromatic if both_aromatic => None,
        t => Some(t.symbol()),
    }
}

fn write_atom(out: &mut String, atom: &Atom, bonds: &[BondType]) {
    let z = atom.atomic_number;
    let symbol = elements::symbol(z).unwrap_or("*");
    let symbol = if atom.aromatic {
        symbol.to_ascii_lowercase()
    } else {
        symbol.to_string()
    };
    let organic = elements::is_organic(z)
        && atom.formal_charge == 0
        && atom.isotope == 0
        && (!atom.aromatic || elements::can_be_aromatic(z))
        && valence::default_hydrogens(z, atom.aromatic, bonds) == Some(atom.implicit_hydrogens);
    if organic {
        out.push_str(&symbol);
        return;
    }
    out.push('[');
    if atom.isotope != 0 {
        write!(out, "{}", atom.isotope).unwrap();
    }
    out.push_str(&symbol);
    match atom.implicit_hydrogens {
        0 => {}
        1 => out.push('H'),
        h => write!(out, "H{h}").unwrap(),
    }
    match atom.formal_charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        c if c > 0 => write!(out, "+{c}").unwrap(),
        c => write!(out, "-{}", -c).unwrap(),
    }
    out.push(']');
}
