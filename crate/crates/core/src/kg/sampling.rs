use rand::Rng;

use super::store::{Triple, TripletStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeMode {
    Uniform,
    /// Resample corruptions that form a known fact.
    Filtered,
}

pub const MAX_RETRIES: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeBatch {
    /// `k × B` corruptions: entry `j * B + i` corrupts positive `i`.
    pub triples: Vec<Triple>,
    /// Filtered corruptions accepted after exhausting the retry budget.
    pub exhausted: usize,
}

/// Corrupts head or tail (fair coin) of every positive `k` times.
pub fn negative_sample(
    store: &TripletStore,
    positives: &[Triple],
    k: usize,
    mode: NegativeMode,
    rng: &mut impl Rng,
) -> NegativeBatch {
    let n = store.num_entities();
    let mut triples = Vec::with_capacity(k * positives.len());
    let mut exhausted = 0;
    for _ in 0..k {
        for &(h, r, t) in positives {
            let mut attempt = 0;
            loop {
                let e = rng.gen_range(0..n);
                let corrupted = if rng.gen_bool(0.5) {
                    (e, r, t)
                } else {
                    (h, r, e)
                };
                if mode == NegativeMode::Uniform || !store.is_known(corrupted) {
                    triples.push(corrupted);
                    break;
                }
                attempt += 1;
                if attempt == MAX_RETRIES {
                    exhausted += 1;
                    triples.push(corrupted);
                    break;
                }
            }
        }
    }
    if exhausted > 0 {
        log::warn!("{exhausted} negatives accepted after {MAX_RETRIES} retries");
    }
    NegativeBatch { triples, exhausted }
}
