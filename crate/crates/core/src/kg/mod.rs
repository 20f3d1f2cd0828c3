//! Knowledge-graph embeddings: triple stores, scoring models, negative
//! sampling, training and filtered link-prediction evaluation.

mod eval;
mod loss;
mod model;
mod sampling;
mod store;
pub mod synthetic;
mod train;

pub use eval::{evaluate, pessimistic_rank, query_topk, EvalReport, RankStats};
pub use loss::{kg_loss, LossKind};
pub use model::{wrap_phase, EmbeddingModel, ModelKind, ENTITY_PARAM, RELATION_PARAM};
pub use sampling::{negative_sample, NegativeBatch, NegativeMode, MAX_RETRIES};
pub use store::{parse_triples, write_triples, Split, Triple, TripletStore, Vocab};
pub use train::{train, TrainConfig, TrainReport};

use thiserror::Error;

use crate::tensor::TensorError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KgError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown {kind} `{name}`{}", suggestion.as_ref().map(|s| format!("; did you mean `{s}`?")).unwrap_or_default())]
    UnknownName {
        kind: &'static str,
        name: String,
        suggestion: Option<String>,
    },
    #[error("unknown model kind `{0}`")]
    UnknownModel(String),
    #[error("unknown split `{0}` (expected train, valid or test)")]
    UnknownSplit(String),
    #[error("triple {triple:?} is out of the vocabulary range")]
    TripleOutOfRange { triple: Triple },
    #[error("duplicate triple {triple:?} in {split}")]
    DuplicateTriple { split: &'static str, triple: Triple },
    #[error("triple {triple:?} appears in more than one split")]
    OverlappingSplits { triple: Triple },
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("head, relation and tail batches differ in length")]
    BatchLength,
    #[error("{table} table has shape {found:?}, expected {expected}")]
    TableShape {
        table: &'static str,
        expected: String,
        found: Vec<usize>,
    },
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type Result<T> = std::result::Result<T, KgError>;
