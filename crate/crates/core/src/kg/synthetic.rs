//! Deterministic compositional knowledge graph.
//!
//! Entities `e0..e{n-1}` on a cycle with relations `succ` (i → i+1),
//! `plus2` (i → i+2) and `inv_succ` (i+1 → i), all modulo n.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::store::{Triple, TripletStore, Vocab};
use super::{KgError, Result};

pub const RELATIONS: [&str; 3] = ["succ", "plus2", "inv_succ"];
const SUCC: usize = 0;
const PLUS2: usize = 1;
const INV_SUCC: usize = 2;

/// Split sizes for `total` facts: ⌊0.8·N⌋, ⌊0.1·N⌋, remainder.
pub fn split_sizes(total: usize) -> (usize, usize, usize) {
    let train = total * 8 / 10;
    let valid = total / 10;
    (train, valid, total - train - valid)
}

fn all_facts(n: usize) -> Vec<Triple> {
    let mut facts = Vec::with_capacity(3 * n);
    for i in 0..n {
        facts.push((i, SUCC, (i + 1) % n));
        facts.push((i, PLUS2, (i + 2) % n));
        facts.push(((i + 1) % n, INV_SUCC, i));
    }
    facts
}

/// Whether a held-out fact follows from `train` by inversion or composition.
fn inferable(train: &std::collections::HashSet<Triple>, (h, r, t): Triple, n: usize) -> bool {
    let step =
        |a: usize, b: usize| train.contains(&(a, SUCC, b)) || train.contains(&(b, INV_SUCC, a));
    match r {
        SUCC => {
            train.contains(&(t, INV_SUCC, h))
                || (train.contains(&(h, PLUS2, (t + 1) % n)) && step(t, (t + 1) % n))
        }
        PLUS2 => step(h, (h + 1) % n) && step((h + 1) % n, t),
        _ => {
            train.contains(&(t, SUCC, h))
                || (train.contains(&((h + n - 2) % n, PLUS2, h)) && step((h + n - 2) % n, t))
        }
    }
}

/// All 3n facts, shuffled with `seed` and split 80/10/10. The shuffle is
/// redrawn until every valid and test fact is inferable from train.
pub fn generate(n: usize, seed: u64) -> Result<TripletStore> {
    if n < 8 {
        return Err(KgError::Config(format!(
            "need at least 8 entities, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut facts = all_facts(n);
    let (n_train, n_valid, _) = split_sizes(facts.len());
    loop {
        facts.shuffle(&mut rng);
        let train: std::collections::HashSet<Triple> = facts[..n_train].iter().copied().collect();
        if facts[n_train..].iter().all(|&f| inferable(&train, f, n)) {
            break;
        }
    }
    let entities = Vocab::from_names((0..n).map(|i| format!("e{i}")));
    let relations = Vocab::from_names(RELATIONS.map(String::from));
    TripletStore::new(
        entities,
        relations,
        facts[..n_train].to_vec(),
        facts[n_train..n_train + n_valid].to_vec(),
        facts[n_train + n_valid..].to_vec(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::store::Split;

    #[test]
    fn sizes_for_ten_entities() {
        let s = generate(10, 1).unwrap();
        let sizes: Vec<usize> = Split::ALL.iter().map(|&x| s.split(x).len()).collect();
        assert_eq!(sizes, [24, 3, 3]);
    }

    #[test]
    fn deterministic_and_consistent() {
        let a = generate(40, 7).unwrap();
        assert_eq!(a, generate(40, 7).unwrap());
        for &(h, r, t) in a.split(Split::Test) {
            match a.relations.name(r) {
                "succ" => assert_eq!(t, (h + 1) % 40),
                "plus2" => assert_eq!(t, (h + 2) % 40),
                _ => assert_eq!(h, (t + 1) % 40),
            }
        }
    }

    #[test]
    fn too_small_rejected() {
        assert!(generate(7, 0).is_err());
    }
}
