use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use graphrx::kg::{
    self, evaluate, parse_triples, query_topk, synthetic, write_triples, EmbeddingModel,
    EvalReport, KgError, LossKind, ModelKind, NegativeMode, Split, TrainConfig, TripletStore,
    Vocab, ENTITY_PARAM, RELATION_PARAM,
};
use graphrx::tensor::OptimizerConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Outcome;
use crate::checkpoint::{Checkpoint, Meta, Metric, ModelFamily, Vocabularies};
use crate::config::{required, CommandConfig};
use crate::report::Report;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenKgConfig {
    pub n_entities: usize,
    /// Directory receiving `train.tsv`, `valid.tsv` and `test.tsv`.
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for GenKgConfig {
    fn default() -> Self {
        Self {
            n_entities: 40,
            out: "out/kg".into(),
            seed: 0,
        }
    }
}

impl CommandConfig for GenKgConfig {
    const STRING_KEYS: &'static [&'static str] = &["out"];

    fn validate(&self) -> Result<()> {
        ensure!(
            self.n_entities >= 8,
            "n_entities must be at least 8, got {}",
            self.n_entities
        );
        Ok(())
    }
}

pub fn gen_kg(config: &GenKgConfig) -> Result<Outcome> {
    let store = synthetic::generate(config.n_entities, config.seed)?;
    for split in Split::ALL {
        let path = config.out.join(format!("{}.tsv", split.name()));
        crate::checkpoint::write_atomic(&path, write_triples(&store, split).as_bytes())?;
    }
    let sizes: Vec<usize> = Split::ALL.iter().map(|&s| store.split(s).len()).collect();
    println!(
        "wrote {} facts over {} entities to {} (train/valid/test {}/{}/{})",
        sizes.iter().sum::<usize>(),
        store.num_entities(),
        config.out.display(),
        sizes[0],
        sizes[1],
        sizes[2]
    );
    Ok(Outcome { ok: true })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KgModelSpec {
    pub model: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KgTrainConfig {
    /// Directory with `train.tsv`, `valid.tsv` and `test.tsv`.
    pub data: Option<PathBuf>,
    pub model: String,
    pub dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    /// `adam` or `sgd`.
    pub optimizer: String,
    pub lr: f32,
    pub negatives: usize,
    /// `filtered` or `uniform`.
    pub negative_mode: String,
    pub loss: String,
    pub margin: f32,
    pub adversarial_temperature: f32,
    /// Split evaluated after training.
    pub eval_split: String,
    /// Continue from this checkpoint; its model and vocabulary must match.
    pub resume: Option<PathBuf>,
    pub out: PathBuf,
    /// Defaults to `<out>/kg_model.ckpt`.
    pub checkpoint: Option<PathBuf>,
    /// Defaults to `<out>/kg_train.jsonl`.
    pub report: Option<PathBuf>,
    pub seed: u64,
}

impl Default for KgTrainConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            data: None,
            model: ModelKind::RotatE.name().into(),
            dim: 32,
            epochs: 1000,
            batch_size: 4,
            optimizer: "adam".into(),
            lr: 1.0,
            negatives: t.negatives,
            negative_mode: "filtered".into(),
            loss: t.loss.name().into(),
            margin: t.margin,
            adversarial_temperature: t.adversarial_temperature,
            eval_split: Split::Valid.name().into(),
            resume: None,
            out: "out".into(),
            checkpoint: None,
            report: None,
            seed: 0,
        }
    }
}

impl CommandConfig for KgTrainConfig {
    const STRING_KEYS: &'static [&'static str] = &[
        "data",
        "model",
        "optimizer",
        "negative_mode",
        "loss",
        "eval_split",
        "resume",
        "out",
        "checkpoint",
        "report",
    ];

    fn validate(&self) -> Result<()> {
        required(&self.data, "data")?;
        self.model.parse::<ModelKind>()?;
        self.eval_split.parse::<Split>()?;
        self.train_config()?;
        ensure!(self.dim > 0, "dim must be positive");
        Ok(())
    }
}

impl KgTrainConfig {
    fn train_config(&self) -> Result<TrainConfig> {
        let optimizer = match self.optimizer.as_str() {
            "adam" => OptimizerConfig::adam(self.lr),
            "sgd" => OptimizerConfig::sgd(self.lr),
            other => bail!("unknown optimizer `{other}` (expected adam or sgd)"),
        };
        let negative_mode = match self.negative_mode.as_str() {
            "filtered" => NegativeMode::Filtered,
            "uniform" => NegativeMode::Uniform,
            other => bail!("unknown negative_mode `{other}` (expected filtered or uniform)"),
        };
        Ok(TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            optimizer,
            negatives: self.negatives,
            negative_mode,
            loss: self.loss.parse::<LossKind>().map_err(anyhow::Error::msg)?,
            margin: self.margin,
            adversarial_temperature: self.adversarial_temperature,
            seed: self.seed,
        })
    }
}

fn read_split(dir: &Path, split: Split) -> Result<Vec<(String, String, String)>> {
    let path = dir.join(format!("{}.tsv", split.name()));
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    parse_triples(&text).with_context(|| format!("parsing {}", path.display()))
}

fn lookup(vocab: &Vocab, kind: &'static str, name: &str) -> kg::Result<usize> {
    vocab.get(name).ok_or_else(|| KgError::UnknownName {
        kind,
        name: name.to_string(),
        suggestion: vocab.nearest(name).map(str::to_string),
    })
}

/// Loads a split directory. With `vocab`, names are resolved against it
/// instead of building vocabularies by first appearance.
pub fn load_store(dir: &Path, vocab: Option<&Vocabularies>) -> Result<TripletStore> {
    let [train, valid, test] = Split::ALL.map(|s| read_split(dir, s));
    let (train, valid, test) = (train?, valid?, test?);
    let Some(vocab) = vocab else {
        return Ok(TripletStore::from_named(&train, &valid, &test)?);
    };
    let entities = Vocab::from_names(vocab.entities.iter().cloned());
    let relations = Vocab::from_names(vocab.relations.iter().cloned());
    let index = |rows: &[(String, String, String)], split: Split| -> Result<Vec<kg::Triple>> {
        rows.iter()
            .map(|(h, r, t)| {
                Ok((
                    lookup(&entities, "entity", h)?,
                    lookup(&relations, "relation", r)?,
                    lookup(&entities, "entity", t)?,
                ))
            })
            .collect::<kg::Result<_>>()
            .with_context(|| {
                format!(
                    "{}/{}.tsv does not match the checkpoint vocabulary",
                    dir.display(),
                    split.name()
                )
            })
    };
    let train = index(&train, Split::Train)?;
    let valid = index(&valid, Split::Valid)?;
    let test = index(&test, Split::Test)?;
    Ok(TripletStore::new(entities, relations, train, valid, test)?)
}

fn vocabularies(store: &TripletStore) -> Vocabularies {
    Vocabularies {
        entities: store.entities.names().to_vec(),
        relations: store.relations.names().to_vec(),
    }
}

fn to_checkpoint(model: &EmbeddingModel, store: &TripletStore, meta: Meta) -> Result<Checkpoint> {
    let spec = KgModelSpec {
        model: model.kind.name().into(),
        dim: model.dim,
    };
    Ok(Checkpoint {
        family: ModelFamily::KgEmbedding,
        model: serde_json::to_value(spec)?,
        feature_scheme: None,
        vocab: Some(vocabularies(store)),
        meta,
        tensors: vec![
            (ENTITY_PARAM.into(), model.entity_table().clone()),
            (RELATION_PARAM.into(), model.relation_table().clone()),
        ],
    })
}

fn from_checkpoint(ckpt: &Checkpoint) -> Result<(KgModelSpec, EmbeddingModel, &Vocabularies)> {
    ckpt.expect_family(ModelFamily::KgEmbedding)?;
    let spec: KgModelSpec =
        serde_json::from_value(ckpt.model.clone()).context("checkpoint model config")?;
    let vocab = ckpt
        .vocab
        .as_ref()
        .context("checkpoint lacks vocabularies")?;
    let table = |name: &str| {
        ckpt.tensor(name)
            .cloned()
            .with_context(|| format!("checkpoint lacks tensor `{name}`"))
    };
    let model = EmbeddingModel::from_tables(
        spec.model.parse()?,
        spec.dim,
        table(ENTITY_PARAM)?,
        table(RELATION_PARAM)?,
    )?;
    ensure!(
        model.num_entities() == vocab.entities.len()
            && model.num_relations() == vocab.relations.len(),
        "checkpoint tables do not match its vocabularies"
    );
    Ok((spec, model, vocab))
}

fn eval_fields(split: Split, report: &EvalReport) -> serde_json::Value {
    let all = report.combined();
    json!({
        "split": split.name(),
        "filtered": report.filtered,
        "triples": report.triples,
        "mrr": all.mrr(),
        "mr": all.mr(),
        "hits1": all.hits(1),
        "hits3": all.hits(3),
        "hits10": all.hits(10),
        "head_mrr": report.head.mrr(),
        "tail_mrr": report.tail.mrr(),
    })
}

pub fn train(config: &KgTrainConfig) -> Result<Outcome> {
    let data = required(&config.data, "data")?;
    let kind: ModelKind = config.model.parse()?;
    let eval_split: Split = config.eval_split.parse()?;
    let (store, mut model, start_epoch) = match &config.resume {
        Some(path) => {
            let ckpt = Checkpoint::load(path)?;
            let (spec, model, vocab) = from_checkpoint(&ckpt)?;
            let wanted = KgModelSpec {
                model: kind.name().into(),
                dim: config.dim,
            };
            ensure!(
                spec == wanted,
                "cannot resume: checkpoint {} holds {} with dim {}, but the config asks for {} with dim {}",
                path.display(),
                spec.model,
                spec.dim,
                wanted.model,
                wanted.dim
            );
            (load_store(data, Some(vocab))?, model, ckpt.meta.epoch)
        }
        None => {
            let store = load_store(data, None)?;
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let model = EmbeddingModel::init(
                kind,
                config.dim,
                store.num_entities(),
                store.num_relations(),
                &mut rng,
            );
            (store, model, 0)
        }
    };
    let mut report = Report::new("kg-train", config)?;
    let outcome = kg::train(&store, &mut model, &config.train_config()?)?;
    for (i, loss) in outcome.epoch_losses.iter().enumerate() {
        report.push(
            "epoch",
            json!({"epoch": start_epoch + i + 1, "train_loss": loss}),
        )?;
    }
    if outcome.exhausted_negatives > 0 {
        log::warn!(
            "{} negatives were accepted after exhausting the filtered-sampling retries",
            outcome.exhausted_negatives
        );
    }
    let eval = evaluate(&store, &model, eval_split, true)?;
    report.push("kg_eval", eval_fields(eval_split, &eval))?;
    let mrr = eval.combined().mrr();
    let epoch = start_epoch + config.epochs;
    let ckpt_path = config
        .checkpoint
        .clone()
        .unwrap_or_else(|| config.out.join("kg_model.ckpt"));
    let meta = Meta {
        seed: config.seed,
        epoch,
        metric: Some(Metric {
            name: format!("{}_mrr", eval_split.name()),
            value: mrr,
        }),
    };
    to_checkpoint(&model, &store, meta)?.save(&ckpt_path)?;
    report.push(
        "summary",
        json!({
            "command": "kg-train",
            "model": kind.name(),
            "epochs": epoch,
            "final_loss": outcome.epoch_losses.last(),
            "exhausted_negatives": outcome.exhausted_negatives,
            "checkpoint": ckpt_path.display().to_string(),
        }),
    )?;
    let report_path = config
        .report
        .clone()
        .unwrap_or_else(|| config.out.join("kg_train.jsonl"));
    report.save(&report_path)?;
    println!(
        "{} after {epoch} epochs: {} MRR {mrr:.4}; checkpoint {}",
        kind.name(),
        eval_split.name(),
        ckpt_path.display()
    );
    Ok(Outcome { ok: true })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KgEvalConfig {
    pub checkpoint: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub split: String,
    pub filtered: bool,
    pub out: PathBuf,
    /// Defaults to `<out>/kg_eval.jsonl`.
    pub report: Option<PathBuf>,
    pub seed: u64,
}

impl Default for KgEvalConfig {
    fn default() -> Self {
        Self {
            checkpoint: None,
            data: None,
            split: Split::Test.name().into(),
            filtered: true,
            out: "out".into(),
            report: None,
            seed: 0,
        }
    }
}

impl CommandConfig for KgEvalConfig {
    const STRING_KEYS: &'static [&'static str] = &["checkpoint", "data", "split", "out", "report"];

    fn validate(&self) -> Result<()> {
        required(&self.checkpoint, "checkpoint")?;
        required(&self.data, "data")?;
        self.split.parse::<Split>()?;
        Ok(())
    }
}

pub fn eval(config: &KgEvalConfig) -> Result<Outcome> {
    let ckpt = Checkpoint::load(required(&config.checkpoint, "checkpoint")?)?;
    let (_, model, vocab) = from_checkpoint(&ckpt)?;
    let store = load_store(required(&config.data, "data")?, Some(vocab))?;
    let split: Split = config.split.parse()?;
    let result = evaluate(&store, &model, split, config.filtered)?;
    let mut report = Report::new("kg-eval", config)?;
    report.push("kg_eval", eval_fields(split, &result))?;
    report.push(
        "summary",
        json!({"command": "kg-eval", "model": model.kind.name()}),
    )?;
    let path = config
        .report
        .clone()
        .unwrap_or_else(|| config.out.join("kg_eval.jsonl"));
    report.save(&path)?;
    let (all, head, tail) = (result.combined(), result.head, result.tail);
    println!(
        "{:<8}{:>10}{:>10}{:>10}{:>10}{:>10}",
        "side", "MRR", "MR", "Hits@1", "Hits@3", "Hits@10"
    );
    for (side, s) in [("head", head), ("tail", tail), ("both", all)] {
        println!(
            "{side:<8}{:>10.4}{:>10.2}{:>10.4}{:>10.4}{:>10.4}",
            s.mrr(),
            s.mr(),
            s.hits(1),
            s.hits(3),
            s.hits(10)
        );
    }
    println!(
        "{} {} triples, {}; report {}",
        split.name(),
        result.triples,
        if config.filtered { "filtered" } else { "raw" },
        path.display()
    );
    Ok(Outcome { ok: true })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KgQueryConfig {
    pub checkpoint: Option<PathBuf>,
    /// Split directory whose facts are excluded from the answers; optional.
    pub data: Option<PathBuf>,
    pub head: Option<String>,
    pub relation: Option<String>,
    pub k: usize,
    pub include_known: bool,
    pub out: PathBuf,
    /// Defaults to `<out>/kg_query.jsonl`.
    pub report: Option<PathBuf>,
    pub seed: u64,
}

impl Default for KgQueryConfig {
    fn default() -> Self {
        Self {
            checkpoint: None,
            data: None,
            head: None,
            relation: None,
            k: 10,
            include_known: false,
            out: "out".into(),
            report: None,
            seed: 0,
        }
    }
}

impl CommandConfig for KgQueryConfig {
    const STRING_KEYS: &'static [&'static str] =
        &["checkpoint", "data", "head", "relation", "out", "report"];

    fn validate(&self) -> Result<()> {
        required(&self.checkpoint, "checkpoint")?;
        required(&self.head, "head")?;
        required(&self.relation, "relation")?;
        ensure!(self.k > 0, "k must be at least 1");
        Ok(())
    }
}

pub fn query(config: &KgQueryConfig) -> Result<Outcome> {
    let ckpt = Checkpoint::load(required(&config.checkpoint, "checkpoint")?)?;
    let (_, model, vocab) = from_checkpoint(&ckpt)?;
    let store = match &config.data {
        Some(dir) => load_store(dir, Some(vocab))?,
        None => TripletStore::new(
            Vocab::from_names(vocab.entities.iter().cloned()),
            Vocab::from_names(vocab.relations.iter().cloned()),
            Vec::new(),
            Vec::new(),
            Vec::new(),
        )?,
    };
    let head = required(&config.head, "head")?;
    let relation = required(&config.relation, "relation")?;
    let answers = query_topk(
        &store,
        &model,
        head,
        relation,
        config.k,
        config.include_known,
    )?;
    let mut report = Report::new("kg-query", config)?;
    println!("{:<6}{:<24}{:>12}", "rank", "entity", "score");
    for (i, (entity, score)) in answers.iter().enumerate() {
        report.push(
            "prediction",
            json!({"rank": i + 1, "entity": entity, "score": score}),
        )?;
        println!("{:<6}{entity:<24}{score:>12.4}", i + 1);
    }
    report.push(
        "summary",
        json!({"command": "kg-query", "head": head, "relation": relation, "answers": answers.len()}),
    )?;
    let path = config
        .report
        .clone()
        .unwrap_or_else(|| config.out.join("kg_query.jsonl"));
    report.save(&path)?;
    Ok(Outcome { ok: true })
}
