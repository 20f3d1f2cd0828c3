use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use graphrx::{Atom, BondType, Molecule};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Outcome;
use crate::config::{required, CommandConfig};
use crate::report::Report;

/// Number of parse errors echoed into the summary record.
const FIRST_ERRORS: usize = 5;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MolParseConfig {
    /// SMILES file, one molecule per line (text after the first whitespace is ignored).
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    /// Defaults to `<out>/mol_parse.jsonl`.
    pub report: Option<PathBuf>,
    pub seed: u64,
}

impl Default for MolParseConfig {
    fn default() -> Self {
        Self {
            input: None,
            out: "out".into(),
            report: None,
            seed: 0,
        }
    }
}

impl CommandConfig for MolParseConfig {
    const STRING_KEYS: &'static [&'static str] = &["input", "out", "report"];

    fn validate(&self) -> Result<()> {
        required(&self.input, "input").map(|_| ())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MolVizConfig {
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    /// Defaults to `<out>/molecules.dot`.
    pub dot: Option<PathBuf>,
    pub seed: u64,
}

impl Default for MolVizConfig {
    fn default() -> Self {
        Self {
            input: None,
            out: "out".into(),
            dot: None,
            seed: 0,
        }
    }
}

impl CommandConfig for MolVizConfig {
    const STRING_KEYS: &'static [&'static str] = &["input", "out", "dot"];

    fn validate(&self) -> Result<()> {
        required(&self.input, "input").map(|_| ())
    }
}

struct Line {
    number: usize,
    smiles: String,
    parsed: std::result::Result<Molecule, String>,
}

/// Non-blank, non-`#` lines of a SMILES file, parsed.
fn read_smiles(path: &Path) -> Result<Vec<Line>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let smiles = line.split_whitespace().next()?;
            if smiles.starts_with('#') {
                return None;
            }
            Some(Line {
                number: i + 1,
                smiles: smiles.to_string(),
                parsed: Molecule::from_smiles(smiles).map_err(|e| e.to_string()),
            })
        })
        .collect())
}

pub fn parse(config: &MolParseConfig) -> Result<Outcome> {
    let input = required(&config.input, "input")?;
    let lines = read_smiles(input)?;
    let mut report = Report::new("mol-parse", config)?;
    let mut errors = Vec::new();
    for line in &lines {
        match &line.parsed {
            Ok(m) => report.push(
                "molecule",
                json!({
                    "line": line.number,
                    "smiles": line.smiles,
                    "atoms": m.num_atoms(),
                    "bonds": m.num_bonds(),
                    "components": m.split_components()?.len(),
                    "formula": m.formula(),
                }),
            )?,
            Err(message) => {
                log::error!("{}:{}: {message}", input.display(), line.number);
                report.push(
                    "parse_error",
                    json!({"line": line.number, "smiles": line.smiles, "message": message}),
                )?;
                errors.push(json!({"line": line.number, "message": message}));
            }
        }
    }
    let failed = errors.len();
    let parsed = lines.len() - failed;
    errors.truncate(FIRST_ERRORS);
    report.push(
        "summary",
        json!({"command": "mol-parse", "parsed": parsed, "failed": failed, "first_errors": errors}),
    )?;
    let path = config
        .report
        .clone()
        .unwrap_or_else(|| config.out.join("mol_parse.jsonl"));
    report.save(&path)?;
    println!(
        "parsed {parsed}, failed {failed}; report {}",
        path.display()
    );
    Ok(Outcome { ok: failed == 0 })
}

pub fn viz(config: &MolVizConfig) -> Result<Outcome> {
    let input = required(&config.input, "input")?;
    let lines = read_smiles(input)?;
    let mut text = String::new();
    let mut failed = 0;
    for line in &lines {
        match &line.parsed {
            Ok(m) => text.push_str(&to_dot(&format!("mol_{}", line.number), &line.smiles, m)),
            Err(message) => {
                log::error!("{}:{}: {message}", input.display(), line.number);
                failed += 1;
            }
        }
    }
    let path = config
        .dot
        .clone()
        .unwrap_or_else(|| config.out.join("molecules.dot"));
    crate::checkpoint::write_atomic(&path, text.as_bytes())?;
    println!(
        "wrote {} graphs to {}, {failed} failed",
        lines.len() - failed,
        path.display()
    );
    Ok(Outcome { ok: failed == 0 })
}

fn atom_label(a: &Atom) -> String {
    let charge = match a.formal_charge {
        0 => String::new(),
        1 => "+".into(),
        -1 => "-".into(),
        c if c > 0 => format!("{c}+"),
        c => format!("{}-", -c),
    };
    format!("{}{charge}", a.symbol())
}

/// One undirected DOT graph: atoms labeled element and charge; single bonds
/// plain, double `=`, triple `#`, aromatic dashed.
pub fn to_dot(name: &str, smiles: &str, m: &Molecule) -> String {
    let mut out = format!(
        "graph {name} {{\n  label=\"{}\";\n  node [shape=circle];\n",
        smiles.replace('"', "\\\"")
    );
    for (i, a) in m.atoms().iter().enumerate() {
        let _ = writeln!(out, "  a{i} [label=\"{}\"];", atom_label(a));
    }
    for (u, v, bond) in m.bonds() {
        let style = match bond {
            BondType::Single => "",
            BondType::Double => " [label=\"=\"]",
            BondType::Triple => " [label=\"#\"]",
            BondType::Aromatic => " [style=dashed]",
        };
        let _ = writeln!(out, "  a{u} -- a{v}{style};");
    }
    out.push_str("}\n");
    out
}
