use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::loss::{kg_loss, LossKind};
use super::model::EmbeddingModel;
use super::sampling::{negative_sample, NegativeMode};
use super::store::{Split, TripletStore};
use super::{KgError, Result};
use crate::tensor::{Optimizer, OptimizerConfig, Tape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
    pub negatives: usize,
    pub negative_mode: NegativeMode,
    pub loss: LossKind,
    pub margin: f32,
    pub adversarial_temperature: f32,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 128,
            optimizer: OptimizerConfig::adam(0.01),
            negatives: 8,
            negative_mode: NegativeMode::Filtered,
            loss: LossKind::Margin,
            margin: 2.0,
            adversarial_temperature: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Mean batch loss per epoch.
    pub epoch_losses: Vec<f32>,
    /// Negatives accepted after exhausting the filtered-sampling retries.
    pub exhausted_negatives: usize,
}

/// Mini-batch training on the train split. Batches are reshuffled each
/// epoch; after every optimizer step the model is projected (unit-norm
/// TransE entities, wrapped RotatE phases).
pub fn train(
    store: &TripletStore,
    model: &mut EmbeddingModel,
    config: &TrainConfig,
) -> Result<TrainReport> {
    let triples = store.split(Split::Train);
    if triples.is_empty() {
        return Err(KgError::EmptySplit("train"));
    }
    if config.batch_size == 0 || config.negatives == 0 {
        return Err(KgError::Config(
            "batch_size and negatives must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut optimizer = Optimizer::new(config.optimizer);
    let mut order: Vec<usize> = (0..triples.len()).collect();
    let mut report = TrainReport::default();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0f64;
        let mut batches = 0;
        for (batch, chunk) in order.chunks(config.batch_size).enumerate() {
            let positives: Vec<_> = chunk.iter().map(|&i| triples[i]).collect();
            let negatives = negative_sample(
                store,
                &positives,
                config.negatives,
                config.negative_mode,
                &mut rng,
            );
            report.exhausted_negatives += negatives.exhausted;
            let unzip = |ts: &[(usize, usize, usize)]| -> (Vec<usize>, Vec<usize>, Vec<usize>) {
                let h = ts.iter().map(|t| t.0).collect();
                let r = ts.iter().map(|t| t.1).collect();
                (h, r, ts.iter().map(|t| t.2).collect())
            };
            let (ph, pr, pt) = unzip(&positives);
            let (nh, nr, nt) = unzip(&negatives.triples);

            let mut tape = Tape::new();
            let pos = model.score_on_tape(&mut tape, &ph, &pr, &pt)?;
            let neg = model.score_on_tape(&mut tape, &nh, &nr, &nt)?;
            let neg = tape.reshape(neg, &[config.negatives, positives.len()])?;
            let loss = kg_loss(
                &mut tape,
                config.loss,
                pos,
                neg,
                config.margin,
                config.adversarial_temperature,
            )?;
            let value = tape.value(loss).item()?;
            if !value.is_finite() {
                return Err(KgError::NonFiniteLoss { epoch, batch });
            }
            model.params.zero_grad();
            tape.backward(loss, &mut model.params)?;
            optimizer.step(&mut model.params)?;
            model.project();
            total += value as f64;
            batches += 1;
        }
        report.epoch_losses.push((total / batches as f64) as f32);
    }
    Ok(report)
}
