//! Single-file model container.
//!
//! ```text
//! GRAPHRX-CKPT/1
//! { ...pretty JSON header with a blob directory... }
//! END-HEADER
//! <raw little-endian f32 blobs, back to back>
//! ```
//!
//! Blob offsets are relative to the first byte after `END-HEADER\n`.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use graphrx::Tensor;
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "GRAPHRX-CKPT/1";
const END_HEADER: &[u8] = b"\nEND-HEADER\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    KgEmbedding,
    Property,
}

impl ModelFamily {
    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::KgEmbedding => "kg_embedding",
            ModelFamily::Property => "property",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vocabularies {
    pub entities: Vec<String>,
    pub relations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub seed: u64,
    /// Training epoch the tensors come from; 0 is the initialization.
    pub epoch: usize,
    pub metric: Option<Metric>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlobEntry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
    bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    family: ModelFamily,
    model: serde_json::Value,
    feature_scheme: Option<String>,
    vocab: Option<Vocabularies>,
    meta: Meta,
    blobs: Vec<BlobEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub family: ModelFamily,
    /// Model configuration echo, as written by the owning command.
    pub model: serde_json::Value,
    pub feature_scheme: Option<String>,
    pub vocab: Option<Vocabularies>,
    pub meta: Meta,
    pub tensors: Vec<(String, Tensor)>,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut offset = 0;
        let blobs = self
            .tensors
            .iter()
            .map(|(name, t)| {
                let bytes = t.numel() * 4;
                let entry = BlobEntry {
                    name: name.clone(),
                    shape: t.shape().to_vec(),
                    offset,
                    bytes,
                };
                offset += bytes;
                entry
            })
            .collect();
        let header = Header {
            family: self.family,
            model: self.model.clone(),
            feature_scheme: self.feature_scheme.clone(),
            vocab: self.vocab.clone(),
            meta: self.meta.clone(),
            blobs,
        };
        let mut out = format!("{FORMAT}\n").into_bytes();
        out.extend(serde_json::to_string_pretty(&header)?.into_bytes());
        out.extend_from_slice(END_HEADER);
        for (_, t) in &self.tensors {
            out.extend(t.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let magic = format!("{FORMAT}\n");
        let Some(rest) = bytes.strip_prefix(magic.as_bytes()) else {
            let first = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
            bail!(
                "not a {FORMAT} checkpoint (first line `{}`)",
                String::from_utf8_lossy(&first[..first.len().min(40)])
            );
        };
        let split = rest
            .windows(END_HEADER.len())
            .position(|w| w == END_HEADER)
            .context("checkpoint header is not terminated")?;
        let header: Header = serde_json::from_slice(&rest[..split]).context("checkpoint header")?;
        let data = &rest[split + END_HEADER.len()..];
        let mut expected = 0;
        let mut tensors = Vec::with_capacity(header.blobs.len());
        for blob in &header.blobs {
            let numel: usize = blob.shape.iter().product();
            ensure!(
                blob.bytes == numel * 4,
                "blob `{}` declares shape {:?} but {} bytes",
                blob.name,
                blob.shape,
                blob.bytes
            );
            ensure!(
                blob.offset == expected,
                "blob `{}` is not contiguous",
                blob.name
            );
            expected += blob.bytes;
            let raw = data
                .get(blob.offset..blob.offset + blob.bytes)
                .with_context(|| format!("blob `{}` runs past the end of the file", blob.name))?;
            tensors.push((
                blob.name.clone(),
                Tensor::from_le_bytes(blob.shape.clone(), raw)?,
            ));
        }
        ensure!(
            data.len() == expected,
            "checkpoint has {} trailing bytes after its blobs",
            data.len() - expected
        );
        Ok(Self {
            family: header.family,
            model: header.model,
            feature_scheme: header.feature_scheme,
            vocab: header.vocab,
            meta: header.meta,
            tensors,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("reading checkpoint {}", path.display()))?;
        Self::from_bytes(&bytes).with_context(|| format!("loading checkpoint {}", path.display()))
    }

    /// Errors unless the checkpoint holds a model of `family`.
    pub fn expect_family(&self, family: ModelFamily) -> Result<()> {
        ensure!(
            self.family == family,
            "checkpoint holds a {} model, expected {}",
            self.family.name(),
            family.name()
        );
        Ok(())
    }

    pub fn tensor(&self, name: &str) -> Option<&Tensor> {
        self.tensors.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;

    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
