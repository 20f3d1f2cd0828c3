//! Message passing (GCN, GIN), graph readout and molecular property
//! prediction over packed batches.

mod data;
mod layers;
mod message;
mod metrics;
mod model;
mod train;

pub use data::{split, Batch, Dataset, SplitKind, SplitSpec, Splits};
pub use layers::{readout, Activation, Affine, Epsilon, GcnLayer, GinLayer, Readout};
pub use message::MessageGraph;
pub use metrics::{auroc, evaluate_property, Metrics};
pub use model::{property_loss, Layer, LayerKind, ModelConfig, PropertyModel, TaskKind};
pub use train::{train_property, EpochRecord, PropertyReport, PropertyTrainConfig};

use thiserror::Error;

use crate::graph::GraphError;
use crate::tensor::TensorError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GnnError {
    #[error("{layer}: expected shape {expected:?}, found {found:?}")]
    Width {
        layer: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("label {value} at row {index} is outside the task's domain")]
    Label { index: usize, value: f32 },
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, GnnError>;
