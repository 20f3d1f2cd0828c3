use super::data::Dataset;
use super::model::{PropertyModel, TaskKind};
use super::{GnnError, Result};

const EVAL_BATCH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metrics {
    Binary {
        count: usize,
        /// Mean cross-entropy on logits.
        loss: f64,
        /// Absent when only one class is present.
        auroc: Option<f64>,
        /// Fraction of molecules whose probability lands on the right side of 0.5.
        accuracy: f64,
    },
    Regression {
        count: usize,
        /// Mean squared error.
        loss: f64,
        rmse: f64,
        mae: f64,
    },
}

impl Metrics {
    pub fn loss(&self) -> f64 {
        match *self {
            Metrics::Binary { loss, .. } | Metrics::Regression { loss, .. } => loss,
        }
    }

    /// Model-selection score, higher is better: AUROC (accuracy when AUROC is
    /// absent) or negated RMSE.
    pub fn selection_score(&self) -> f64 {
        match *self {
            Metrics::Binary {
                auroc, accuracy, ..
            } => auroc.unwrap_or(accuracy),
            Metrics::Regression { rmse, .. } => -rmse,
        }
    }
}

/// Area under the ROC curve. A positive outranking a negative counts 1 and a
/// tie counts ½, which equals the trapezoidal area with tied scores forming
/// diagonal steps. `None` when either class is missing.
pub fn auroc(scores: &[f32], labels: &[f32]) -> Option<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let positives = labels.iter().filter(|&&y| y == 1.0).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }
    // Walk tie groups in ascending score order, counting negatives below.
    let mut wins = 0.0f64;
    let mut neg_below = 0usize;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let group = &order[i..j];
        let pos = group.iter().filter(|&&k| labels[k] == 1.0).count();
        let neg = group.len() - pos;
        wins += pos as f64 * (neg_below as f64 + 0.5 * neg as f64);
        neg_below += neg;
        i = j;
    }
    Some(wins / (positives as f64 * negatives as f64))
}

/// Metrics of `model` on the molecules at `indices`.
pub fn evaluate_property(
    model: &PropertyModel,
    dataset: &Dataset,
    indices: &[usize],
) -> Result<Metrics> {
    if indices.is_empty() {
        return Err(GnnError::EmptySplit("evaluation"));
    }
    let mut outputs = Vec::with_capacity(indices.len());
    for chunk in indices.chunks(EVAL_BATCH) {
        let batch = dataset.batch(chunk);
        outputs.extend(model.predict(&batch.graph, &batch.features)?);
    }
    let labels: Vec<f32> = indices.iter().map(|&i| dataset.labels()[i]).collect();
    let count = indices.len();
    let n = count as f64;
    Ok(match model.config.task {
        TaskKind::Binary => {
            let loss = outputs
                .iter()
                .zip(&labels)
                .map(|(&z, &y)| crate::tensor::softplus(z) as f64 - (y * z) as f64)
                .sum::<f64>()
                / n;
            let correct = outputs
                .iter()
                .zip(&labels)
                .filter(|&(&z, &y)| (z >= 0.0) == (y == 1.0))
                .count();
            Metrics::Binary {
                count,
                loss,
                auroc: auroc(&outputs, &labels),
                accuracy: correct as f64 / n,
            }
        }
        TaskKind::Regression => {
            let err: Vec<f64> = outputs
                .iter()
                .zip(&labels)
                .map(|(&z, &y)| (z - y) as f64)
                .collect();
            let mse = err.iter().map(|e| e * e).sum::<f64>() / n;
            Metrics::Regression {
                count,
                loss: mse,
                rmse: mse.sqrt(),
                mae: err.iter().map(|e| e.abs()).sum::<f64>() / n,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_case() {
        assert_eq!(
            auroc(&[0.9, 0.8, 0.3, 0.1], &[1.0, 0.0, 1.0, 0.0]),
            Some(0.75)
        );
    }

    #[test]
    fn separable_and_tied() {
        assert_eq!(
            auroc(&[0.0, 1.0, 1.0, 0.0], &[0.0, 1.0, 1.0, 0.0]),
            Some(1.0)
        );
        assert_eq!(auroc(&[0.3; 5], &[0.0, 1.0, 1.0, 0.0, 1.0]), Some(0.5));
    }

    #[test]
    fn one_class_is_absent() {
        assert_eq!(auroc(&[0.1, 0.2], &[1.0, 1.0]), None);
        assert_eq!(auroc(&[], &[]), None);
    }
}
