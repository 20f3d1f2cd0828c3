//! Knowledge-graph oracles: small random stores and brute-force ranking that
//! scores candidates one triple at a time.

use std::collections::HashSet;

use graphrx::kg::{EmbeddingModel, ModelKind, RankStats, Split, Triple, TripletStore, Vocab};
use graphrx::Tensor;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A store with `2..=max_e` entities and `1..=max_r` relations whose facts
/// are spread over the three splits; the test split is never empty.
pub fn random_store(rng: &mut ChaCha8Rng, max_e: usize, max_r: usize) -> TripletStore {
    let ne = rng.gen_range(2..=max_e);
    let nr = rng.gen_range(1..=max_r);
    let mut all: Vec<Triple> = (0..ne)
        .flat_map(|h| (0..nr).flat_map(move |r| (0..ne).map(move |t| (h, r, t))))
        .collect();
    all.shuffle(rng);
    let count = rng.gen_range(1..=all.len().min(3 * ne));
    let mut splits = [Vec::new(), Vec::new(), Vec::new()];
    splits[2].push(all[0]);
    for &f in &all[1..count] {
        splits[rng.gen_range(0..3)].push(f);
    }
    let [train, valid, test] = splits;
    let names = |p: &str, n: usize| Vocab::from_names((0..n).map(|i| format!("{p}{i}")));
    TripletStore::new(names("e", ne), names("r", nr), train, valid, test).unwrap()
}

/// Random tables for `kind`. With `coarse`, entries are drawn from
/// `{-1, 0, 1}` so that tied scores are common.
pub fn random_model(
    rng: &mut ChaCha8Rng,
    kind: ModelKind,
    dim: usize,
    ne: usize,
    nr: usize,
    coarse: bool,
) -> EmbeddingModel {
    let (de, dr, rows) = match kind {
        ModelKind::TransE | ModelKind::DistMult => (dim, dim, nr),
        ModelKind::ComplEx => (2 * dim, 2 * dim, nr),
        ModelKind::RotatE => (2 * dim, dim, nr),
        ModelKind::SimplE => (2 * dim, dim, 2 * nr),
    };
    let mut table = |r: usize, c: usize| {
        let data = (0..r * c)
            .map(|_| {
                if coarse {
                    rng.gen_range(-1i32..=1) as f32
                } else {
                    rng.gen_range(-1.5f32..1.5)
                }
            })
            .collect();
        Tensor::new(vec![r, c], data).unwrap()
    };
    let ent = table(ne, de);
    let rel = table(rows, dr);
    EmbeddingModel::from_tables(kind, dim, ent, rel).unwrap()
}

fn all_facts(store: &TripletStore) -> HashSet<Triple> {
    Split::ALL
        .iter()
        .flat_map(|&s| store.split(s).iter().copied())
        .collect()
}

/// `(head rank, tail rank)` per triple of `split`, by enumeration.
pub fn brute_ranks(
    store: &TripletStore,
    model: &EmbeddingModel,
    split: Split,
    filtered: bool,
) -> Vec<(u64, u64)> {
    let facts = all_facts(store);
    let one = |h: usize, r: usize, t: usize| model.score(&[h], &[r], &[t]).unwrap()[0];
    store
        .split(split)
        .iter()
        .map(|&(h, r, t)| {
            let truth = one(h, r, t);
            let mut head = 1;
            let mut tail = 1;
            for c in 0..store.num_entities() {
                if c != h && !(filtered && facts.contains(&(c, r, t))) && one(c, r, t) >= truth {
                    head += 1;
                }
                if c != t && !(filtered && facts.contains(&(h, r, c))) && one(h, r, c) >= truth {
                    tail += 1;
                }
            }
            (head, tail)
        })
        .collect()
}

pub fn stats(ranks: impl IntoIterator<Item = u64>) -> RankStats {
    let mut s = RankStats::default();
    for r in ranks {
        s.push(r);
    }
    s
}

/// The exact RotatE solution of the synthetic cycle KG: entity `i` has phase
/// `2π·kⱼ·i/n` in complex dimension `j`, and each relation rotates by its
/// offset in the cycle.
pub fn cycle_rotate_model(
    store: &TripletStore,
    dim: usize,
    rng: &mut ChaCha8Rng,
) -> EmbeddingModel {
    let n = store.num_entities();
    let freq: Vec<f32> = (0..dim).map(|_| rng.gen_range(1..n) as f32).collect();
    let angle = |j: usize, steps: f32| 2.0 * std::f32::consts::PI * freq[j] * steps / n as f32;
    let mut ent = Vec::with_capacity(n * 2 * dim);
    for i in 0..n {
        for j in 0..dim {
            let a = angle(j, i as f32);
            ent.extend([a.cos(), a.sin()]);
        }
    }
    let offsets = store
        .relations
        .names()
        .iter()
        .map(|name| match name.as_str() {
            "succ" => 1.0,
            "plus2" => 2.0,
            "inv_succ" => -1.0,
            other => panic!("unexpected relation {other}"),
        });
    let rel: Vec<f32> = offsets
        .flat_map(|o| (0..dim).map(move |j| (j, o)))
        .map(|(j, o)| graphrx::kg::wrap_phase(angle(j, o)))
        .collect();
    let nr = store.num_relations();
    EmbeddingModel::from_tables(
        ModelKind::RotatE,
        dim,
        Tensor::new(vec![n, 2 * dim], ent).unwrap(),
        Tensor::new(vec![nr, dim], rel).unwrap(),
    )
    .unwrap()
}
