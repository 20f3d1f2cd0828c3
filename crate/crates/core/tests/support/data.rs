use graphrx::datasets::CONTAINS_NITROGEN_CSV;
use graphrx::gnn::{Dataset, TaskKind};
use graphrx::Molecule;

/// The bundled `smiles,label` dataset where the label marks nitrogen.
pub fn nitrogen_dataset() -> Dataset {
    let (molecules, labels) = CONTAINS_NITROGEN_CSV
        .lines()
        .skip(1)
        .map(|line| {
            let (smiles, label) = line.rsplit_once(',').expect("two columns");
            (
                Molecule::from_smiles(smiles).expect("bundled SMILES parse"),
                label.parse::<f32>().expect("numeric label"),
            )
        })
        .unzip();
    Dataset::new(TaskKind::Binary, molecules, labels).unwrap()
}
