use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::message::MessageGraph;
use super::model::TaskKind;
use super::{GnnError, Result};
use crate::molecule::{Molecule, ATOM_FEATURES};
use crate::tensor::Tensor;

/// Labelled molecules with their atom features computed once.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub task: TaskKind,
    molecules: Vec<Molecule>,
    labels: Vec<f32>,
    features: Vec<Tensor>,
}

impl Dataset {
    /// Binary labels must be 0 or 1, regression labels finite.
    pub fn new(task: TaskKind, molecules: Vec<Molecule>, labels: Vec<f32>) -> Result<Self> {
        if molecules.len() != labels.len() {
            return Err(GnnError::Config(format!(
                "{} molecules but {} labels",
                molecules.len(),
                labels.len()
            )));
        }
        for (index, &value) in labels.iter().enumerate() {
            let ok = match task {
                TaskKind::Binary => value == 0.0 || value == 1.0,
                TaskKind::Regression => value.is_finite(),
            };
            if !ok {
                return Err(GnnError::Label { index, value });
            }
        }
        let features = molecules
            .par_iter()
            .map(Molecule::featurize_atoms)
            .collect();
        Ok(Self {
            task,
            molecules,
            labels,
            features,
        })
    }

    pub fn len(&self) -> usize {
        self.molecules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.molecules.is_empty()
    }

    pub fn molecules(&self) -> &[Molecule] {
        &self.molecules
    }

    pub fn labels(&self) -> &[f32] {
        &self.labels
    }

    /// Concatenated features and message structure of the selected molecules.
    pub fn batch(&self, indices: &[usize]) -> Batch {
        let sizes: Vec<usize> = indices
            .iter()
            .map(|&i| self.molecules[i].num_atoms())
            .collect();
        let mut offset = 0;
        let mut edges = Vec::new();
        let mut data = Vec::with_capacity(sizes.iter().sum::<usize>() * ATOM_FEATURES);
        for (&i, &n) in indices.iter().zip(&sizes) {
            edges.extend(
                self.molecules[i]
                    .bonds()
                    .into_iter()
                    .map(|(a, b, _)| (a + offset, b + offset)),
            );
            data.extend_from_slice(self.features[i].data());
            offset += n;
        }
        Batch {
            graph: MessageGraph::from_parts(&sizes, edges),
            features: Tensor::new(vec![offset, ATOM_FEATURES], data)
                .expect("rows match atom counts"),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub graph: MessageGraph,
    pub features: Tensor,
    pub labels: Vec<f32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Random,
    /// Groups molecules by the written SMILES of their Murcko scaffold.
    Scaffold,
}

impl SplitKind {
    pub const ALL: [SplitKind; 2] = [SplitKind::Random, SplitKind::Scaffold];

    pub fn name(self) -> &'static str {
        match self {
            SplitKind::Random => "random",
            SplitKind::Scaffold => "scaffold",
        }
    }
}

impl std::str::FromStr for SplitKind {
    type Err = GnnError;

    fn from_str(s: &str) -> Result<Self> {
        SplitKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GnnError::Config(format!("unknown split kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub kind: SplitKind,
    /// Train, valid and test fractions.
    pub fractions: [f64; 3],
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            kind: SplitKind::Random,
            fractions: [0.8, 0.1, 0.1],
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.fractions.iter().sum();
        if self.fractions.iter().any(|&f| f.is_nan() || f <= 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(GnnError::Config(format!(
                "split fractions must be positive and sum to 1, got {:?}",
                self.fractions
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

impl Splits {
    fn ensure_non_empty(self) -> Result<Self> {
        for (name, part) in [
            ("train", &self.train),
            ("valid", &self.valid),
            ("test", &self.test),
        ] {
            if part.is_empty() {
                return Err(GnnError::EmptySplit(name));
            }
        }
        Ok(self)
    }
}

/// Random: seeded shuffle, then ⌊f·n⌋ train and valid with the rest as test.
/// Scaffold: scaffold groups by descending size (ties by key) fill train,
/// then valid, then test, each up to its fraction of `n`.
pub fn split(molecules: &[Molecule], spec: &SplitSpec) -> Result<Splits> {
    spec.validate()?;
    let n = molecules.len();
    let cap = |f: f64| (f * n as f64 + 1e-9).floor() as usize;
    let splits = match spec.kind {
        SplitKind::Random => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
            let n_train = cap(spec.fractions[0]);
            let n_valid = cap(spec.fractions[1]).min(n - n_train);
            let test = order.split_off(n_train + n_valid);
            let valid = order.split_off(n_train);
            Splits {
                train: order,
                valid,
                test,
            }
        }
        SplitKind::Scaffold => {
            let keys: Vec<String> = molecules
                .par_iter()
                .map(|m| m.murcko_scaffold().to_smiles())
                .collect();
            let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (i, k) in keys.iter().enumerate() {
                groups.entry(k).or_default().push(i);
            }
            let mut groups: Vec<(&str, Vec<usize>)> = groups.into_iter().collect();
            groups.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
            let (train_cap, valid_cap) = (cap(spec.fractions[0]), cap(spec.fractions[1]));
            let mut s = Splits::default();
            for (_, members) in groups {
                if s.train.len() + members.len() <= train_cap {
                    s.train.extend(members);
                } else if s.valid.len() + members.len() <= valid_cap {
                    s.valid.extend(members);
                } else {
                    s.test.extend(members);
                }
            }
            s
        }
    };
    splits.ensure_non_empty()
}
