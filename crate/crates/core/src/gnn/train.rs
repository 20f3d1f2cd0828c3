use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::data::{Dataset, Splits};
use super::metrics::{evaluate_property, Metrics};
use super::model::{property_loss, PropertyModel};
use super::{GnnError, Result};
use crate::tensor::{Optimizer, OptimizerConfig, ParamSet, Tape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
    /// Seeds the per-epoch shuffles.
    pub seed: u64,
}

impl Default for PropertyTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 32,
            optimizer: OptimizerConfig::adam(0.01),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean batch loss over the epoch.
    pub train_loss: f32,
    pub valid: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    /// Validation metrics of the initialized model.
    pub initial_valid: Metrics,
    pub epochs: Vec<EpochRecord>,
    /// Epoch with the best validation score, ties going to the lower
    /// validation loss; 0 is the initialization.
    pub best_epoch: usize,
    /// Parameter values at `best_epoch`.
    pub best_params: ParamSet,
}

/// Validation ranking: selection score, then lower loss.
fn key(m: &Metrics) -> (f64, f64) {
    (m.selection_score(), -m.loss())
}

/// Mini-batch training on `splits.train` with validation after every epoch.
/// `model` ends at its final state; the best-validation state is in the report.
pub fn train_property(
    dataset: &Dataset,
    model: &mut PropertyModel,
    splits: &Splits,
    config: &PropertyTrainConfig,
) -> Result<PropertyReport> {
    if splits.train.is_empty() {
        return Err(GnnError::EmptySplit("train"));
    }
    if config.batch_size == 0 {
        return Err(GnnError::Config("batch_size must be positive".into()));
    }
    if dataset.task != model.config.task {
        return Err(GnnError::Config(format!(
            "dataset task {} does not match model task {}",
            dataset.task.name(),
            model.config.task.name()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut optimizer = Optimizer::new(config.optimizer);
    let mut order = splits.train.clone();
    let initial_valid = evaluate_property(model, dataset, &splits.valid)?;
    let mut best = (key(&initial_valid), 0, model.params.clone());
    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0f64;
        let mut batches = 0;
        for (batch_index, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch = dataset.batch(chunk);
            let mut tape = Tape::new();
            let x = tape.constant(batch.features);
            let out = model.forward(&mut tape, &batch.graph, x)?;
            let loss = property_loss(&mut tape, model.config.task, out, &batch.labels)?;
            let value = tape.value(loss).item()?;
            if !value.is_finite() {
                return Err(GnnError::NonFiniteLoss {
                    epoch,
                    batch: batch_index,
                });
            }
            model.params.zero_grad();
            tape.backward(loss, &mut model.params)?;
            optimizer.step(&mut model.params)?;
            total += value as f64;
            batches += 1;
        }
        let valid = evaluate_property(model, dataset, &splits.valid)?;
        if key(&valid) > best.0 {
            best = (key(&valid), epoch, model.params.clone());
        }
        log::debug!("epoch {epoch}: train loss {:.5}", total / batches as f64);
        epochs.push(EpochRecord {
            epoch,
            train_loss: (total / batches as f64) as f32,
            valid,
        });
    }
    Ok(PropertyReport {
        initial_valid,
        epochs,
        best_epoch: best.1,
        best_params: best.2,
    })
}
