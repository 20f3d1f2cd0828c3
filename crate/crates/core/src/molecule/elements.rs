/// Element symbols indexed by atomic number minus one.
const SYMBOLS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
    "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl",
    "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh",
    "Fl", "Mc", "Lv", "Ts", "Og",
];

pub fn symbol(atomic_number: u8) -> Option<&'static str> {
    SYMBOLS
        .get((atomic_number as usize).checked_sub(1)?)
        .copied()
}

pub fn atomic_number(symbol: &str) -> Option<u8> {
    SYMBOLS
        .iter()
        .position(|&s| s == symbol)
        .map(|i| i as u8 + 1)
}

/// Atoms that may be written without brackets.
pub fn is_organic(atomic_number: u8) -> bool {
    matches!(atomic_number, 5 | 6 | 7 | 8 | 9 | 15 | 16 | 17 | 35 | 53)
}

/// Atoms that may be written as lowercase aromatic symbols.
pub fn can_be_aromatic(atomic_number: u8) -> bool {
    matches!(atomic_number, 5 | 6 | 7 | 8 | 15 | 16)
}

/// Allowed valences of the neutral element, ascending; `None` means the
/// element has no valence model and is never flagged.
pub fn neutral_valences(atomic_number: u8) -> Option<&'static [u8]> {
    match atomic_number {
        5 => Some(&[3]),
        6 => Some(&[4]),
        7 => Some(&[3]),
        8 => Some(&[2]),
        15 => Some(&[3, 5]),
        16 => Some(&[2, 4, 6]),
        9 | 17 | 35 | 53 => Some(&[1]),
        _ => None,
    }
}

/// Allowed valences once a formal charge is applied. Elements right of carbon
/// gain one bond per positive charge (N+ behaves like C), boron the reverse,
/// and carbon loses one per unit of either sign.
pub fn charged_valences(atomic_number: u8, charge: i8) -> Option<Vec<u8>> {
    let base = neutral_valences(atomic_number)?;
    let shift: i32 = match atomic_number {
        5 => -(charge as i32),
        6 => -(charge as i32).abs(),
        _ => charge as i32,
    };
    Some(
        base.iter()
            .map(|&v| v as i32 + shift)
            .filter(|&v| v >= 0)
            .map(|v| v as u8)
            .collect(),
    )
}
