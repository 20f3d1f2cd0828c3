use rayon::prelude::*;

use super::model::EmbeddingModel;
use super::store::{Split, Triple, TripletStore};
use super::{KgError, Result};

/// Rank statistics for one direction, kept as exact sums until read.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RankStats {
    pub count: u64,
    pub rank_sum: u64,
    pub reciprocal_sum: f64,
    pub hits1: u64,
    pub hits3: u64,
    pub hits10: u64,
}

impl RankStats {
    pub fn push(&mut self, rank: u64) {
        self.count += 1;
        self.rank_sum += rank;
        self.reciprocal_sum += 1.0 / rank as f64;
        self.hits1 += (rank <= 1) as u64;
        self.hits3 += (rank <= 3) as u64;
        self.hits10 += (rank <= 10) as u64;
    }

    pub fn merge(&mut self, other: &RankStats) {
        self.count += other.count;
        self.rank_sum += other.rank_sum;
        self.reciprocal_sum += other.reciprocal_sum;
        self.hits1 += other.hits1;
        self.hits3 += other.hits3;
        self.hits10 += other.hits10;
    }

    pub fn mr(&self) -> f64 {
        self.rank_sum as f64 / self.count as f64
    }

    pub fn mrr(&self) -> f64 {
        self.reciprocal_sum / self.count as f64
    }

    pub fn hits(&self, k: u32) -> f64 {
        let n = match k {
            1 => self.hits1,
            3 => self.hits3,
            10 => self.hits10,
            _ => panic!("hits@{k} is not tracked"),
        };
        n as f64 / self.count as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub filtered: bool,
    pub triples: usize,
    /// Ranks of the true head among corrupted heads.
    pub head: RankStats,
    /// Ranks of the true tail among corrupted tails.
    pub tail: RankStats,
}

impl EvalReport {
    pub fn combined(&self) -> RankStats {
        let mut all = self.head;
        all.merge(&self.tail);
        all
    }
}

/// Pessimistic rank of `truth`: one plus the number of admissible candidates
/// scoring at least as high.
pub fn pessimistic_rank(scores: &[f32], truth: usize, excluded: impl Fn(usize) -> bool) -> u64 {
    let target = scores[truth];
    1 + (0..scores.len())
        .filter(|&c| c != truth && !excluded(c) && scores[c] >= target)
        .count() as u64
}

fn rank_triple(
    store: &TripletStore,
    model: &EmbeddingModel,
    (h, r, t): Triple,
    filtered: bool,
) -> Result<(u64, u64)> {
    let heads = model.score_heads(r, t)?;
    let head_rank = pessimistic_rank(&heads, h, |c| filtered && store.is_known((c, r, t)));
    let tails = model.score_tails(h, r)?;
    let tail_rank = pessimistic_rank(&tails, t, |c| filtered && store.is_known((h, r, c)));
    Ok((head_rank, tail_rank))
}

/// Ranks every triple of `split` in both directions. With `filtered`, any
/// candidate forming a fact in some split is skipped. Triples are scored in
/// parallel and merged in split order.
pub fn evaluate(
    store: &TripletStore,
    model: &EmbeddingModel,
    split: Split,
    filtered: bool,
) -> Result<EvalReport> {
    let triples = store.split(split);
    if triples.is_empty() {
        return Err(KgError::EmptySplit(split.name()));
    }
    let ranks: Vec<(u64, u64)> = triples
        .par_iter()
        .map(|&tr| rank_triple(store, model, tr, filtered))
        .collect::<Result<_>>()?;
    let mut report = EvalReport {
        filtered,
        triples: triples.len(),
        head: RankStats::default(),
        tail: RankStats::default(),
    };
    for (h, t) in ranks {
        report.head.push(h);
        report.tail.push(t);
    }
    Ok(report)
}

/// Top-`k` tails for `(head, relation)`, highest score first, ties by entity
/// index. Known facts are skipped unless `include_known`.
pub fn query_topk(
    store: &TripletStore,
    model: &EmbeddingModel,
    head: &str,
    relation: &str,
    k: usize,
    include_known: bool,
) -> Result<Vec<(String, f32)>> {
    let h = store.entity(head)?;
    let r = store.relation(relation)?;
    if k == 0 {
        return Err(KgError::Config("k must be at least 1".into()));
    }
    let scores = model.score_tails(h, r)?;
    let mut candidates: Vec<usize> = (0..scores.len())
        .filter(|&c| include_known || !store.is_known((h, r, c)))
        .collect();
    candidates.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(candidates
        .into_iter()
        .take(k)
        .map(|c| (store.entities.name(c).to_string(), scores[c]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_are_pessimistic() {
        assert_eq!(pessimistic_rank(&[1.0, 1.0, 1.0], 0, |_| false), 3);
        assert_eq!(pessimistic_rank(&[0.5, 2.0, 1.0], 2, |_| false), 2);
        assert_eq!(pessimistic_rank(&[0.5, 2.0, 1.0], 2, |c| c == 1), 1);
    }

    #[test]
    fn stats_summaries() {
        let mut s = RankStats::default();
        for r in [1, 2, 4, 20] {
            s.push(r);
        }
        assert_eq!(s.mr(), 6.75);
        assert!((s.mrr() - (1.0 + 0.5 + 0.25 + 0.05) / 4.0).abs() < 1e-12);
        assert_eq!((s.hits(1), s.hits(3), s.hits(10)), (0.25, 0.5, 0.75));
    }
}
