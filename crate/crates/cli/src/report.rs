//! Line-delimited JSON reports and their schema check. Field meanings are
//! documented in `docs/report-schema.md`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::checkpoint::{write_atomic, FORMAT};

/// Records accumulated in memory and written atomically.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    /// Starts a report with the effective configuration of `command`.
    pub fn new(command: &str, config: &impl Serialize) -> Result<Self> {
        let mut report = Self::default();
        report.push(
            "config",
            json!({
                "command": command,
                "version": graphrx::VERSION,
                "checkpoint_format": FORMAT,
                "config": serde_json::to_value(config)?,
            }),
        )?;
        Ok(report)
    }

    /// Appends `fields` (an object) tagged with `record`.
    pub fn push(&mut self, record: &str, fields: Value) -> Result<()> {
        let Value::Object(mut map) = fields else {
            bail!("report record `{record}` must be an object");
        };
        map.insert("record".into(), Value::String(record.into()));
        self.lines.push(serde_json::to_string(&map)?);
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.lines.join("\n");
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }
}

/// JSON types a field may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Str,
    Int,
    Num,
    Bool,
    Obj,
    Arr,
}

impl Kind {
    fn accepts(self, v: &Value) -> bool {
        match self {
            Kind::Str => v.is_string(),
            Kind::Int => v.is_u64(),
            Kind::Num => v.is_number(),
            Kind::Bool => v.is_boolean(),
            Kind::Obj => v.is_object(),
            Kind::Arr => v.is_array(),
        }
    }
}

/// Required fields of every record type. Extra fields are allowed.
const SCHEMA: &[(&str, &[(&str, Kind)])] = &[
    (
        "config",
        &[
            ("command", Kind::Str),
            ("version", Kind::Str),
            ("checkpoint_format", Kind::Str),
            ("config", Kind::Obj),
        ],
    ),
    (
        "molecule",
        &[
            ("line", Kind::Int),
            ("smiles", Kind::Str),
            ("atoms", Kind::Int),
            ("bonds", Kind::Int),
            ("components", Kind::Int),
            ("formula", Kind::Str),
        ],
    ),
    (
        "parse_error",
        &[
            ("line", Kind::Int),
            ("smiles", Kind::Str),
            ("message", Kind::Str),
        ],
    ),
    (
        "dataset",
        &[
            ("rows", Kind::Int),
            ("used", Kind::Int),
            ("skipped_missing_label", Kind::Int),
            ("skipped_unparsable", Kind::Int),
        ],
    ),
    (
        "split",
        &[
            ("kind", Kind::Str),
            ("seed", Kind::Int),
            ("fractions", Kind::Arr),
            ("sizes", Kind::Arr),
        ],
    ),
    ("epoch", &[("epoch", Kind::Int), ("train_loss", Kind::Num)]),
    (
        "kg_eval",
        &[
            ("split", Kind::Str),
            ("filtered", Kind::Bool),
            ("triples", Kind::Int),
            ("mrr", Kind::Num),
            ("mr", Kind::Num),
            ("hits1", Kind::Num),
            ("hits3", Kind::Num),
            ("hits10", Kind::Num),
        ],
    ),
    (
        "prop_eval",
        &[
            ("split", Kind::Str),
            ("count", Kind::Int),
            ("loss", Kind::Num),
        ],
    ),
    (
        "prediction",
        &[
            ("rank", Kind::Int),
            ("entity", Kind::Str),
            ("score", Kind::Num),
        ],
    ),
    ("summary", &[("command", Kind::Str)]),
];

/// Checks every line of a report against the record schema. Returns the
/// number of records.
pub fn check(text: &str) -> Result<usize> {
    let mut count = 0;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let value: Value =
            serde_json::from_str(line).with_context(|| format!("line {n}: not JSON"))?;
        let Value::Object(map) = value else {
            bail!("line {n}: record is not an object");
        };
        let record = map
            .get("record")
            .and_then(Value::as_str)
            .with_context(|| format!("line {n}: missing string field `record`"))?;
        let (_, fields) = SCHEMA
            .iter()
            .find(|(name, _)| *name == record)
            .with_context(|| format!("line {n}: unknown record type `{record}`"))?;
        for &(field, kind) in fields.iter() {
            match map.get(field) {
                Some(v) if kind.accepts(v) => {}
                Some(v) => bail!("line {n}: `{record}.{field}` should be {kind:?}, found {v}"),
                None => bail!("line {n}: `{record}` record lacks `{field}`"),
            }
        }
        if count == 0 && record != "config" {
            bail!("line {n}: reports must start with a `config` record");
        }
        count += 1;
    }
    Ok(count)
}

/// Optional-number field for metrics that may be undefined.
pub fn opt_num(v: Option<f64>) -> Value {
    v.map_or(Value::Null, |x| json!(x))
}
