//! SMILES lexer and parser for the supported subset.
//!
//! Organic-subset atoms `B C N O P S F Cl Br I`, aromatic `b c n o p s`,
//! bracket atoms `[isotope symbol chirality? Hn? charge?]`, bonds `- = # :`,
//! branches, ring bonds `1`-`9` and `%nn`, and `.` fragments. Stereo marks
//! (`/ \ @ @@`) are read and dropped with a warning.

use std::collections::BTreeMap;

use thiserror::Error;

use super::elements;
use super::valence;
use super::{Atom, BondType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesError {
    #[error("unexpected character `{found}` at position {position}")]
    Lexical { position: usize, found: char },
    #[error("unexpected end of input inside a bracket atom")]
    UnterminatedBracket,
    #[error("unmatched branch at position {position}")]
    UnmatchedBranch { position: usize },
    #[error("ring bond {ring} opened at position {position} is never closed")]
    UnclosedRing { ring: u16, position: usize },
    #[error("ring bond {ring} at position {position} has conflicting bond symbols")]
    RingBondConflict { ring: u16, position: usize },
    #[error("bond at position {position} does not connect two atoms")]
    DanglingBond { position: usize },
    #[error("atoms bonded twice (position {position})")]
    DuplicateBond { position: usize },
    #[error("aromatic atom {atom} at position {position} is not in a ring")]
    AromaticOutsideRing { atom: usize, position: usize },
    #[error("atom {atom} ({element}) exceeds every allowed valence")]
    Valence { atom: usize, element: String },
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<SmilesError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondSymbol {
    Single,
    Double,
    Triple,
    Aromatic,
    /// `/` or `\`; read as single.
    Directional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AtomToken {
    pub atomic_number: u8,
    pub aromatic: bool,
    pub bracket: bool,
    pub isotope: u16,
    /// Written H count; only bracket atoms carry one.
    pub hydrogens: Option<u8>,
    pub charge: i8,
    pub chiral: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmilesToken {
    Atom(AtomToken),
    Bond(BondSymbol),
    BranchOpen,
    BranchClose,
    RingBond(u16),
    Dot,
}

/// Splits `s` into tokens paired with their character positions.
pub fn tokenize(s: &str) -> Result<Vec<(usize, SmilesToken)>, SmilesError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let lexical = |position: usize| SmilesError::Lexical {
        position,
        found: chars[position],
    };
    while i < chars.len() {
        let start = i;
        let c = chars[i];
        let token = match c {
            '(' => SmilesToken::BranchOpen,
            ')' => SmilesToken::BranchClose,
            '.' => SmilesToken::Dot,
            '-' => SmilesToken::Bond(BondSymbol::Single),
            '=' => SmilesToken::Bond(BondSymbol::Double),
            '#' => SmilesToken::Bond(BondSymbol::Triple),
            ':' => SmilesToken::Bond(BondSymbol::Aromatic),
            '/' | '\\' => SmilesToken::Bond(BondSymbol::Directional),
            '1'..='9' => SmilesToken::RingBond(c as u16 - '0' as u16),
            '%' => {
                let d: Vec<u16> = (1..=2)
                    .map(|k| chars.get(i + k).and_then(|c| c.to_digit(10)))
                    .map(|d| d.map(|d| d as u16))
                    .collect::<Option<_>>()
                    .ok_or_else(|| match chars.get(i + 1).and(chars.get(i + 2)) {
                        Some(_) => lexical(if chars[i + 1].is_ascii_digit() {
                            i + 2
                        } else {
                            i + 1
                        }),
                        None => SmilesError::Lexical {
                            position: i,
                            found: '%',
                        },
                    })?;
                i += 2;
                SmilesToken::RingBond(d[0] * 10 + d[1])
            }
            '[' => {
                let (atom, next) = lex_bracket(&chars, i + 1)?;
                i = next - 1;
                SmilesToken::Atom(atom)
            }
            'B' | 'C' => {
                let (z, two) = match (c, chars.get(i + 1)) {
                    ('B', Some('r')) => (35, true),
                    ('C', Some('l')) => (17, true),
                    ('B', _) => (5, false),
                    _ => (6, false),
                };
                if two {
                    i += 1;
                }
                SmilesToken::Atom(organic(z, false))
            }
            'N' | 'O' | 'P' | 'S' | 'F' | 'I' => {
                let z = elements::atomic_number(&c.to_string()).unwrap();
                SmilesToken::Atom(organic(z, false))
            }
            'b' | 'c' | 'n' | 'o' | 'p' | 's' => {
                let z = elements::atomic_number(&c.to_ascii_uppercase().to_string()).unwrap();
                SmilesToken::Atom(organic(z, true))
            }
            _ => return Err(lexical(i)),
        };
        out.push((start, token));
        i += 1;
    }
    Ok(out)
}

fn organic(atomic_number: u8, aromatic: bool) -> AtomToken {
    AtomToken {
        atomic_number,
        aromatic,
        bracket: false,
        isotope: 0,
        hydrogens: None,
        charge: 0,
        chiral: false,
    }
}

/// Lexes a bracket atom body starting after `[`; returns the token and the
/// index just past `]`.
fn lex_bracket(chars: &[char], mut i: usize) -> Result<(AtomToken, usize), SmilesError> {
    let peek = |i: usize| chars.get(i).copied();
    let lexical = |position: usize| match chars.get(position) {
        Some(&found) => SmilesError::Lexical { position, found },
        None => SmilesError::UnterminatedBracket,
    };
    let mut isotope: u32 = 0;
    while let Some(d) = peek(i).and_then(|c| c.to_digit(10)) {
        isotope = isotope * 10 + d;
        if isotope > 999 {
            return Err(lexical(i));
        }
        i += 1;
    }
    let first = peek(i).ok_or(SmilesError::UnterminatedBracket)?;
    let (atomic_number, aromatic) = if first.is_ascii_uppercase() {
        let two = peek(i + 1)
            .filter(|c| c.is_ascii_lowercase())
            .and_then(|c2| elements::atomic_number(&format!("{first}{c2}")));
        match two {
            Some(z) => {
                i += 2;
                (z, false)
            }
            None => {
                let z = elements::atomic_number(&first.to_string()).ok_or_else(|| lexical(i))?;
                i += 1;
                (z, false)
            }
        }
    } else if matches!(first, 'b' | 'c' | 'n' | 'o' | 'p' | 's') {
        i += 1;
        (
            elements::atomic_number(&first.to_ascii_uppercase().to_string()).unwrap(),
            true,
        )
    } else {
        return Err(lexical(i));
    };
    let mut chiral = false;
    if peek(i) == Some('@') {
        chiral = true;
        i += 1;
        if peek(i) == Some('@') {
            i += 1;
        }
    }
    let mut hydrogens = None;
    if peek(i) == Some('H') {
        i += 1;
        let mut h = 1u8;
        if let Some(d) = peek(i).and_then(|c| c.to_digit(10)) {
            h = d as u8;
            i += 1;
        }
        hydrogens = Some(h);
    }
    let mut charge: i32 = 0;
    if let Some(sign @ ('+' | '-')) = peek(i) {
        let unit = if sign == '+' { 1 } else { -1 };
        i += 1;
        if let Some(d) = peek(i).and_then(|c| c.to_digit(10)) {
            charge = unit * d as i32;
            i += 1;
            if let Some(d2) = peek(i).and_then(|c| c.to_digit(10)) {
                charge = unit * (d as i32 * 10 + d2 as i32);
                i += 1;
            }
        } else {
            charge = unit;
            while peek(i) == Some(sign) {
                charge += unit;
                i += 1;
            }
        }
        if charge.abs() > 15 {
            return Err(lexical(i - 1));
        }
    }
    if peek(i) != Some(']') {
        return Err(lexical(i));
    }
    Ok((
        AtomToken {
            atomic_number,
            aromatic,
            bracket: true,
            isotope: isotope as u16,
            hydrogens: Some(hydrogens.unwrap_or(0)),
            charge: charge as i8,
            chiral,
        },
        i + 1,
    ))
}

/// Parse result before it is turned into a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSmiles {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<(usize, usize, BondType)>,
    pub warnings: Vec<String>,
}

pub fn parse(s: &str) -> Result<ParsedSmiles, SmilesError> {
    let tokens = tokenize(s)?;
    let mut warnings = Vec::new();
    let mut atoms: Vec<AtomToken> = Vec::new();
    let mut atom_pos: Vec<usize> = Vec::new();
    let mut bonds: Vec<(usize, usize, BondType)> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut pending: Option<(usize, BondSymbol)> = None;
    let mut branches: Vec<(usize, usize)> = Vec::new();
    let mut rings: BTreeMap<u16, (usize, Option<BondSymbol>, usize)> = BTreeMap::new();

    for &(pos, token) in &tokens {
        match token {
            SmilesToken::Atom(atom) => {
                if atom.chiral {
                    warnings.push(format!("chirality at position {pos} ignored"));
                }
                let idx = atoms.len();
                atoms.push(atom);
                atom_pos.push(pos);
                match (prev, pending.take()) {
                    (Some(p), bond) => add_bond(
                        &mut bonds,
                        &mut warnings,
                        &atoms,
                        p,
                        idx,
                        bond.map(|b| b.1),
                        pos,
                    )?,
                    (None, Some((bpos, _))) => {
                        return Err(SmilesError::DanglingBond { position: bpos })
                    }
                    (None, None) => {}
                }
                prev = Some(idx);
            }
            SmilesToken::Bond(sym) => {
                if prev.is_none() || pending.is_some() {
                    return Err(SmilesError::DanglingBond { position: pos });
                }
                pending = Some((pos, sym));
            }
            SmilesToken::BranchOpen => {
                let Some(p) = prev else {
                    return Err(SmilesError::UnmatchedBranch { position: pos });
                };
                if let Some((bpos, _)) = pending {
                    return Err(SmilesError::DanglingBond { position: bpos });
                }
                branches.push((p, pos));
            }
            SmilesToken::BranchClose => {
                if let Some((bpos, _)) = pending {
                    return Err(SmilesError::DanglingBond { position: bpos });
                }
                let (p, _) = branches
                    .pop()
                    .ok_or(SmilesError::UnmatchedBranch { position: pos })?;
                prev = Some(p);
            }
            SmilesToken::RingBond(ring) => {
                let Some(p) = prev else {
                    return Err(SmilesError::DanglingBond { position: pos });
                };
                let sym = pending.take().map(|b| b.1);
                match rings.remove(&ring) {
                    Some((open, open_sym, _)) => {
                        let sym = match (open_sym, sym) {
                            (Some(a), Some(b)) if a != b => {
                                return Err(SmilesError::RingBondConflict {
                                    ring,
                                    position: pos,
                                })
                            }
                            (a, b) => a.or(b),
                        };
                        add_bond(&mut bonds, &mut warnings, &atoms, open, p, sym, pos)?;
                    }
                    None => {
                        rings.insert(ring, (p, sym, pos));
                    }
                }
            }
            SmilesToken::Dot => {
                if let Some((bpos, _)) = pending {
                    return Err(SmilesError::DanglingBond { position: bpos });
                }
                prev = None;
            }
        }
    }
    if let Some((bpos, _)) = pending {
        return Err(SmilesError::DanglingBond { position: bpos });
    }
    if let Some(&(_, position)) = branches.last() {
        return Err(SmilesError::UnmatchedBranch { position });
    }
    if let Some((&ring, &(_, _, position))) = rings.iter().next() {
        return Err(SmilesError::UnclosedRing { ring, position });
    }

    let mut incident = vec![Vec::new(); atoms.len()];
    for &(a, b, t) in &bonds {
        incident[a].push(t);
        incident[b].push(t);
    }
    for (i, atom) in atoms.iter().enumerate() {
        let aromatic_bonds = incident[i]
            .iter()
            .filter(|&&t| t == BondType::Aromatic)
            .count();
        if atom.aromatic && aromatic_bonds < 2 {
            return Err(SmilesError::AromaticOutsideRing {
                atom: i,
                position: atom_pos[i],
            });
        }
    }
    let mut out = Vec::with_capacity(atoms.len());
    for (i, tok) in atoms.iter().enumerate() {
        let implicit_hydrogens = match tok.hydrogens {
            Some(h) => h,
            None => valence::default_hydrogens(tok.atomic_number, tok.aromatic, &incident[i])
                .ok_or_else(|| SmilesError::Valence {
                    atom: i,
                    element: elements::symbol(tok.atomic_number)
                        .unwrap_or("?")
                        .to_string(),
                })?,
        };
        out.push(Atom {
            atomic_number: tok.atomic_number,
            formal_charge: tok.charge,
            aromatic: tok.aromatic,
            implicit_hydrogens,
            isotope: tok.isotope,
        });
    }
    Ok(ParsedSmiles {
        atoms: out,
        bonds,
        warnings,
    })
}

fn add_bond(
    bonds: &mut Vec<(usize, usize, BondType)>,
    warnings: &mut Vec<String>,
    atoms: &[AtomToken],
    a: usize,
    b: usize,
    sym: Option<BondSymbol>,
    position: usize,
) -> Result<(), SmilesError> {
    if a == b
        || bonds
            .iter()
            .any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a))
    {
        return Err(SmilesError::DuplicateBond { position });
    }
    let kind = match sym {
        Some(BondSymbol::Single) => BondType::Single,
        Some(BondSymbol::Directional) => {
            warnings.push(format!(
                "directional bond at position {position} read as single"
            ));
            BondType::Single
        }
        Some(BondSymbol::Double) => BondType::Double,
        Some(BondSymbol::Triple) => BondType::Triple,
        Some(BondSymbol::Aromatic) => BondType::Aromatic,
        None if atoms[a].aromatic && atoms[b].aromatic => BondType::Aromatic,
        None => BondType::Single,
    };
    bonds.push((a, b, kind));
    Ok(())
}
