//! Small bundled datasets.

/// Tab-separated `smiles, heavy_atoms, bonds, total_hydrogens` rows after a
/// `#` header line. Counts come from an independent toolkit.
pub const SMILES_CORPUS: &str = include_str!("../data/smiles_corpus.tsv");

/// CSV with columns `smiles,label`; the label is 1 iff the molecule contains
/// a nitrogen atom. 100 positives, 100 negatives.
pub const CONTAINS_NITROGEN_CSV: &str = include_str!("../data/contains_nitrogen.csv");

/// SMILES column of [`SMILES_CORPUS`].
pub fn corpus_smiles() -> Vec<&'static str> {
    SMILES_CORPUS
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split('\t').next().unwrap_or(l))
        .collect()
}
