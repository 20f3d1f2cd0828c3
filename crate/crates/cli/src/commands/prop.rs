use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use graphrx::datasets::CONTAINS_NITROGEN_CSV;
use graphrx::gnn::{
    evaluate_property, split, train_property, Activation, Dataset, LayerKind, Metrics, ModelConfig,
    PropertyModel, PropertyTrainConfig, Readout, SplitKind, SplitSpec, Splits, TaskKind,
};
use graphrx::molecule::{ATOM_FEATURES, FEATURE_SCHEME};
use graphrx::tensor::OptimizerConfig;
use graphrx::Molecule;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Outcome;
use crate::checkpoint::{Checkpoint, Meta, Metric, ModelFamily};
use crate::config::{required, CommandConfig};
use crate::report::{opt_num, Report};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropTrainConfig {
    /// Molecule CSV; the bundled contains-nitrogen sample when absent.
    pub csv: Option<PathBuf>,
    pub smiles_column: String,
    pub label_column: String,
    /// `binary` or `regression`.
    pub task: String,
    /// `gin` or `gcn`.
    pub layer: String,
    pub hidden: Vec<usize>,
    pub activation: String,
    pub readout: String,
    pub learn_eps: bool,
    /// `random` or `scaffold`.
    pub split: String,
    pub fractions: [f64; 3],
    /// Defaults to `seed`.
    pub split_seed: Option<u64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: String,
    pub lr: f32,
    pub out: PathBuf,
    /// Defaults to `<out>/prop_model.ckpt`.
    pub checkpoint: Option<PathBuf>,
    /// Defaults to `<out>/prop_train.jsonl`.
    pub report: Option<PathBuf>,
    pub seed: u64,
}

impl Default for PropTrainConfig {
    fn default() -> Self {
        let model = ModelConfig::default();
        let train = PropertyTrainConfig::default();
        let split = SplitSpec::default();
        Self {
            csv: None,
            smiles_column: "smiles".into(),
            label_column: "label".into(),
            task: model.task.name().into(),
            layer: model.layer.name().into(),
            hidden: model.hidden,
            activation: model.activation.name().into(),
            readout: model.readout.name().into(),
            learn_eps: model.learn_eps,
            split: split.kind.name().into(),
            fractions: split.fractions,
            split_seed: None,
            epochs: train.epochs,
            batch_size: train.batch_size,
            optimizer: "adam".into(),
            lr: train.optimizer.lr,
            out: "out".into(),
            checkpoint: None,
            report: None,
            seed: 0,
        }
    }
}

impl CommandConfig for PropTrainConfig {
    const STRING_KEYS: &'static [&'static str] = &[
        "csv",
        "smiles_column",
        "label_column",
        "task",
        "layer",
        "activation",
        "readout",
        "split",
        "optimizer",
        "out",
        "checkpoint",
        "report",
    ];

    fn validate(&self) -> Result<()> {
        self.model_config()?;
        self.split_spec()?.validate()?;
        self.train_config()?;
        Ok(())
    }
}

impl PropTrainConfig {
    fn model_config(&self) -> Result<ModelConfig> {
        ModelSpec {
            layer: self.layer.clone(),
            input_dim: ATOM_FEATURES,
            hidden: self.hidden.clone(),
            activation: self.activation.clone(),
            readout: self.readout.clone(),
            task: self.task.clone(),
            learn_eps: self.learn_eps,
        }
        .to_config()
    }

    fn split_spec(&self) -> Result<SplitSpec> {
        Ok(SplitSpec {
            kind: self.split.parse::<SplitKind>()?,
            fractions: self.fractions,
            seed: self.split_seed.unwrap_or(self.seed),
        })
    }

    fn train_config(&self) -> Result<PropertyTrainConfig> {
        let optimizer = match self.optimizer.as_str() {
            "adam" => OptimizerConfig::adam(self.lr),
            "sgd" => OptimizerConfig::sgd(self.lr),
            other => bail!("unknown optimizer `{other}` (expected adam or sgd)"),
        };
        ensure!(self.batch_size > 0, "batch_size must be positive");
        Ok(PropertyTrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            optimizer,
            seed: self.seed,
        })
    }
}

/// Persisted echo of [`ModelConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub layer: String,
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub activation: String,
    pub readout: String,
    pub task: String,
    pub learn_eps: bool,
}

impl ModelSpec {
    fn from_config(c: &ModelConfig) -> Self {
        Self {
            layer: c.layer.name().into(),
            input_dim: c.input_dim,
            hidden: c.hidden.clone(),
            activation: c.activation.name().into(),
            readout: c.readout.name().into(),
            task: c.task.name().into(),
            learn_eps: c.learn_eps,
        }
    }

    fn to_config(&self) -> Result<ModelConfig> {
        Ok(ModelConfig {
            layer: self.layer.parse::<LayerKind>()?,
            input_dim: self.input_dim,
            hidden: self.hidden.clone(),
            activation: self.activation.parse::<Activation>()?,
            readout: self.readout.parse::<Readout>()?,
            task: self.task.parse::<TaskKind>()?,
            learn_eps: self.learn_eps,
        })
    }
}

/// Molecules and labels read from a CSV, with skip counts.
#[derive(Debug)]
pub struct Ingested {
    pub rows: usize,
    pub molecules: Vec<Molecule>,
    pub labels: Vec<f32>,
    pub skipped_missing_label: usize,
    pub skipped_unparsable: usize,
}

impl Ingested {
    fn record(&self) -> serde_json::Value {
        json!({
            "rows": self.rows,
            "used": self.molecules.len(),
            "skipped_missing_label": self.skipped_missing_label,
            "skipped_unparsable": self.skipped_unparsable,
        })
    }
}

/// Reads `smiles_column` and `label_column`. Rows with an empty label or an
/// unparsable SMILES are skipped with a warning; non-numeric labels are errors.
pub fn ingest(
    csv_path: Option<&PathBuf>,
    smiles_column: &str,
    label_column: &str,
) -> Result<Ingested> {
    let source = csv_path.map_or_else(
        || "bundled contains-nitrogen sample".to_string(),
        |p| p.display().to_string(),
    );
    let mut reader = match csv_path {
        Some(p) => csv::Reader::from_reader(Box::new(
            std::fs::File::open(p).with_context(|| format!("opening {}", p.display()))?,
        ) as Box<dyn std::io::Read>),
        None => csv::Reader::from_reader(
            Box::new(CONTAINS_NITROGEN_CSV.as_bytes()) as Box<dyn std::io::Read>
        ),
    };
    let headers = reader
        .headers()
        .with_context(|| format!("{source}: reading header"))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .with_context(|| {
                format!(
                    "{source}: header lacks column `{name}` (found {:?})",
                    headers.iter().collect::<Vec<_>>()
                )
            })
    };
    let (s_col, l_col) = (column(smiles_column)?, column(label_column)?);
    let mut out = Ingested {
        rows: 0,
        molecules: Vec::new(),
        labels: Vec::new(),
        skipped_missing_label: 0,
        skipped_unparsable: 0,
    };
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.with_context(|| format!("{source}: row {row}"))?;
        out.rows += 1;
        let label = record.get(l_col).unwrap_or("").trim();
        if label.is_empty() {
            log::warn!("{source}: row {row}: missing label, skipped");
            out.skipped_missing_label += 1;
            continue;
        }
        let label: f32 = label
            .parse()
            .with_context(|| format!("{source}: row {row}: label `{label}` is not a number"))?;
        let smiles = record.get(s_col).unwrap_or("").trim();
        match Molecule::from_smiles(smiles) {
            Ok(m) => {
                out.molecules.push(m);
                out.labels.push(label);
            }
            Err(e) => {
                log::warn!("{source}: row {row}: SMILES `{smiles}` skipped: {e}");
                out.skipped_unparsable += 1;
            }
        }
    }
    Ok(out)
}

fn metrics_fields(split_name: &str, m: &Metrics) -> serde_json::Value {
    match *m {
        Metrics::Binary {
            count,
            loss,
            auroc,
            accuracy,
        } => {
            json!({"split": split_name, "count": count, "loss": loss, "auroc": opt_num(auroc), "accuracy": accuracy})
        }
        Metrics::Regression {
            count,
            loss,
            rmse,
            mae,
        } => {
            json!({"split": split_name, "count": count, "loss": loss, "rmse": rmse, "mae": mae})
        }
    }
}

fn selection_metric(m: &Metrics) -> Metric {
    match *m {
        Metrics::Binary { auroc: Some(a), .. } => Metric {
            name: "valid_auroc".into(),
            value: a,
        },
        Metrics::Binary { accuracy, .. } => Metric {
            name: "valid_accuracy".into(),
            value: accuracy,
        },
        Metrics::Regression { rmse, .. } => Metric {
            name: "valid_rmse".into(),
            value: rmse,
        },
    }
}

fn to_checkpoint(model: &PropertyModel, meta: Meta) -> Result<Checkpoint> {
    Ok(Checkpoint {
        family: ModelFamily::Property,
        model: serde_json::to_value(ModelSpec::from_config(&model.config))?,
        feature_scheme: Some(FEATURE_SCHEME.into()),
        vocab: None,
        meta,
        tensors: model
            .params
            .iter()
            .map(|(_, p)| (p.name.clone(), p.value.clone()))
            .collect(),
    })
}

fn from_checkpoint(ckpt: &Checkpoint) -> Result<PropertyModel> {
    ckpt.expect_family(ModelFamily::Property)?;
    let scheme = ckpt.feature_scheme.as_deref().unwrap_or("none");
    ensure!(
        scheme == FEATURE_SCHEME,
        "checkpoint was trained on feature scheme `{scheme}`, but this build featurizes with `{FEATURE_SCHEME}`"
    );
    let spec: ModelSpec =
        serde_json::from_value(ckpt.model.clone()).context("checkpoint model config")?;
    let mut model = PropertyModel::new(spec.to_config()?, &mut ChaCha8Rng::seed_from_u64(0))?;
    ensure!(
        model.params.len() == ckpt.tensors.len(),
        "checkpoint has {} tensors, the model expects {}",
        ckpt.tensors.len(),
        model.params.len()
    );
    model.params.load_values(|name| ckpt.tensor(name))?;
    Ok(model)
}

pub fn train(config: &PropTrainConfig) -> Result<Outcome> {
    let model_config = config.model_config()?;
    let spec = config.split_spec()?;
    let data = ingest(
        config.csv.as_ref(),
        &config.smiles_column,
        &config.label_column,
    )?;
    let mut report = Report::new("prop-train", config)?;
    report.push("dataset", data.record())?;
    let dataset = Dataset::new(model_config.task, data.molecules, data.labels)?;
    let splits: Splits = split(dataset.molecules(), &spec)?;
    report.push(
        "split",
        json!({
            "kind": spec.kind.name(),
            "seed": spec.seed,
            "fractions": spec.fractions,
            "sizes": [splits.train.len(), splits.valid.len(), splits.test.len()],
        }),
    )?;
    let mut model = PropertyModel::new(model_config, &mut ChaCha8Rng::seed_from_u64(config.seed))?;
    let result = train_property(&dataset, &mut model, &splits, &config.train_config()?)?;
    for e in &result.epochs {
        report.push(
            "epoch",
            json!({"epoch": e.epoch, "train_loss": e.train_loss, "valid": metrics_fields("valid", &e.valid)}),
        )?;
    }
    model.params = result.best_params.clone();
    let mut best_valid = result.initial_valid;
    for (name, indices) in [
        ("train", &splits.train),
        ("valid", &splits.valid),
        ("test", &splits.test),
    ] {
        let m = evaluate_property(&model, &dataset, indices)?;
        report.push("prop_eval", metrics_fields(name, &m))?;
        if name == "valid" {
            best_valid = m;
        }
    }
    let meta = Meta {
        seed: config.seed,
        epoch: result.best_epoch,
        metric: Some(selection_metric(&best_valid)),
    };
    let ckpt_path = config
        .checkpoint
        .clone()
        .unwrap_or_else(|| config.out.join("prop_model.ckpt"));
    to_checkpoint(&model, meta)?.save(&ckpt_path)?;
    report.push(
        "summary",
        json!({
            "command": "prop-train",
            "best_epoch": result.best_epoch,
            "checkpoint": ckpt_path.display().to_string(),
        }),
    )?;
    let report_path = config
        .report
        .clone()
        .unwrap_or_else(|| config.out.join("prop_train.jsonl"));
    report.save(&report_path)?;
    let metric = selection_metric(&best_valid);
    println!(
        "best epoch {} ({} {:.4}); checkpoint {}",
        result.best_epoch,
        metric.name,
        metric.value,
        ckpt_path.display()
    );
    Ok(Outcome { ok: true })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropEvalConfig {
    pub checkpoint: Option<PathBuf>,
    /// Molecule CSV; the bundled contains-nitrogen sample when absent.
    pub csv: Option<PathBuf>,
    pub smiles_column: String,
    pub label_column: String,
    pub out: PathBuf,
    /// Defaults to `<out>/prop_eval.jsonl`.
    pub report: Option<PathBuf>,
    pub seed: u64,
}

impl Default for PropEvalConfig {
    fn default() -> Self {
        Self {
            checkpoint: None,
            csv: None,
            smiles_column: "smiles".into(),
            label_column: "label".into(),
            out: "out".into(),
            report: None,
            seed: 0,
        }
    }
}

impl CommandConfig for PropEvalConfig {
    const STRING_KEYS: &'static [&'static str] = &[
        "checkpoint",
        "csv",
        "smiles_column",
        "label_column",
        "out",
        "report",
    ];

    fn validate(&self) -> Result<()> {
        required(&self.checkpoint, "checkpoint").map(|_| ())
    }
}

pub fn eval(config: &PropEvalConfig) -> Result<Outcome> {
    let model = from_checkpoint(&Checkpoint::load(required(
        &config.checkpoint,
        "checkpoint",
    )?)?)?;
    let data = ingest(
        config.csv.as_ref(),
        &config.smiles_column,
        &config.label_column,
    )?;
    let mut report = Report::new("prop-eval", config)?;
    report.push("dataset", data.record())?;
    let dataset = Dataset::new(model.config.task, data.molecules, data.labels)?;
    let all: Vec<usize> = (0..dataset.len()).collect();
    let m = evaluate_property(&model, &dataset, &all)?;
    report.push("prop_eval", metrics_fields("all", &m))?;
    report.push(
        "summary",
        json!({"command": "prop-eval", "task": model.config.task.name()}),
    )?;
    let path = config
        .report
        .clone()
        .unwrap_or_else(|| config.out.join("prop_eval.jsonl"));
    report.save(&path)?;
    match m {
        Metrics::Binary {
            count,
            loss,
            auroc,
            accuracy,
        } => println!(
            "{count} molecules: loss {loss:.4}, AUROC {}, accuracy {accuracy:.4}",
            auroc.map_or("n/a".into(), |a| format!("{a:.4}"))
        ),
        Metrics::Regression {
            count,
            loss,
            rmse,
            mae,
        } => {
            println!("{count} molecules: loss {loss:.4}, RMSE {rmse:.4}, MAE {mae:.4}")
        }
    }
    Ok(Outcome { ok: true })
}
