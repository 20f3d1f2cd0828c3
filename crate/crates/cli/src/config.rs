//! Layered run configuration: defaults, then a flat TOML file, then
//! command-line flags and `key=value` overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat TOML file of configuration keys.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the `seed` key.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the `out` key.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Configuration overrides.
    #[arg(value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

/// A command's typed configuration. Implementors deny unknown fields and
/// default every key they can.
pub trait CommandConfig: Serialize + DeserializeOwned {
    /// Keys whose `key=value` overrides are taken verbatim rather than parsed
    /// as TOML values.
    const STRING_KEYS: &'static [&'static str];

    /// Checks required keys and value domains.
    fn validate(&self) -> Result<()>;
}

pub fn resolve<C: CommandConfig>(args: &CommonArgs) -> Result<C> {
    let mut table = match &args.config {
        Some(path) => read_table(path)?,
        None => toml::Table::new(),
    };
    for item in &args.overrides {
        let (key, raw) = item
            .split_once('=')
            .with_context(|| format!("expected KEY=VALUE, found `{item}`"))?;
        let key = key.trim();
        if key.is_empty() {
            bail!("empty key in `{item}`");
        }
        table.insert(key.to_string(), override_value(key, raw, C::STRING_KEYS));
    }
    if let Some(seed) = args.seed {
        let seed = i64::try_from(seed).context("--seed does not fit a TOML integer")?;
        table.insert("seed".into(), toml::Value::Integer(seed));
    }
    if let Some(out) = &args.out {
        table.insert("out".into(), toml::Value::String(out.display().to_string()));
    }
    let config: C = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| anyhow::anyhow!("invalid configuration: {}", e.message()))?;
    config.validate()?;
    Ok(config)
}

fn read_table(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let table: toml::Table = text
        .parse()
        .with_context(|| format!("parsing config {}", path.display()))?;
    if let Some((key, _)) = table.iter().find(|(_, v)| v.is_table()) {
        bail!(
            "{}: configuration is flat, but `{key}` is a table",
            path.display()
        );
    }
    Ok(table)
}

fn override_value(key: &str, raw: &str, string_keys: &[&str]) -> toml::Value {
    if string_keys.contains(&key) {
        return toml::Value::String(raw.to_string());
    }
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// `value` or an error naming the key and how to set it.
pub fn required<'a, T>(value: &'a Option<T>, key: &str) -> Result<&'a T> {
    value.as_ref().with_context(|| {
        format!("missing required key `{key}`; set it in the config file or pass {key}=...")
    })
}
