//! Run configuration: one TOML document covering data, pipeline and outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{load_dataset, DataFormat, Dataset, Split, DOCUMENTS_FILE, ITEMS_FILE};
use crate::error::{Error, Result};
use crate::eval::{Pipeline, PipelineConfig, ReportFormat};
use crate::reader::{ReaderRegistry, RemoteReader};
use crate::similarity::{Metric, ProviderRegistry, RemoteEmbedder, REMOTE_ID};

/// Overrides `remote.embed_url`.
pub const EMBED_URL_ENV: &str = "PLOTQA_EMBED_URL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Dataset root. Normalized data holds `documents.jsonl` and
    /// `items.jsonl`; official data holds `qa.json` (or `data/qa.json`) and
    /// a plot directory (`story/plot` or `plot`).
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Explicit items / `qa.json` file, overriding `path`.
    #[serde(default)]
    pub qa: Option<PathBuf>,
    /// Explicit documents file / plot directory, overriding `path`.
    #[serde(default)]
    pub docs: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: DataFormat,
    #[serde(default = "default_split")]
    pub split: Split,
}

fn default_format() -> DataFormat {
    DataFormat::NormalizedJsonl
}

fn default_split() -> Split {
    Split::Val
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            path: None,
            qa: None,
            docs: None,
            format: default_format(),
            split: default_split(),
        }
    }
}

fn first_existing(root: &Path, candidates: &[&str]) -> PathBuf {
    candidates
        .iter()
        .map(|c| root.join(c))
        .find(|p| p.exists())
        .unwrap_or_else(|| root.join(candidates[0]))
}

impl DataConfig {
    /// `(qa_path, docs_path)` for [`load_dataset`].
    pub fn resolve(&self) -> Result<(PathBuf, PathBuf)> {
        let root = self.path.as_deref();
        let pick = |explicit: &Option<PathBuf>, candidates: &[&str]| -> Result<PathBuf> {
            match (explicit, root) {
                (Some(p), _) => Ok(p.clone()),
                (None, Some(r)) => Ok(first_existing(r, candidates)),
                (None, None) => Err(Error::Config(
                    "no dataset given (set data.path or pass --data)".into(),
                )),
            }
        };
        match self.format {
            DataFormat::NormalizedJsonl => Ok((
                pick(&self.qa, &[ITEMS_FILE])?,
                pick(&self.docs, &[DOCUMENTS_FILE])?,
            )),
            DataFormat::MovieqaOfficial => Ok((
                pick(&self.qa, &["data/qa.json", "qa.json"])?,
                pick(&self.docs, &["story/plot", "plot"])?,
            )),
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        let (qa, docs) = self.resolve()?;
        load_dataset(&qa, &docs, self.format, self.split)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteConfig {
    /// Base URL of an embedding server; registers provider `remote`.
    #[serde(default)]
    pub embed_url: Option<String>,
    /// Remote scorers by reader id.
    #[serde(default)]
    pub readers: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub format: ReportFormat,
    /// `{qid, predicted_index}` lines.
    #[serde(default)]
    pub predictions: Option<PathBuf>,
    /// JSONL export of selected contexts.
    #[serde(default)]
    pub contexts: Option<PathBuf>,
}

const TOP_LEVEL_KEYS: &[&str] = &[
    "data",
    "remote",
    "output",
    "jobs",
    "seed",
    "budget",
    "similarity",
    "query_mode",
    "reader",
    "ensemble",
    "temperature",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default, flatten)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub remote: RemoteConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Worker threads for evaluation; all cores when absent.
    #[serde(default)]
    pub jobs: Option<usize>,
    /// Reserved; the built-in components are deterministic.
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    /// Parses a TOML document, rejecting unknown keys at every level.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(key) = table.keys().find(|k| !TOP_LEVEL_KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!(
                "unknown configuration key `{key}` (expected one of {})",
                TOP_LEVEL_KEYS.join(", ")
            )));
        }
        table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Applies [`EMBED_URL_ENV`] when set and non-empty.
    pub fn apply_env(&mut self) {
        if let Ok(url) = std::env::var(EMBED_URL_ENV) {
            if !url.is_empty() {
                self.remote.embed_url = Some(url);
            }
        }
    }

    fn uses_remote_provider(&self) -> bool {
        self.pipeline
            .similarity
            .members
            .iter()
            .any(|m| matches!(&m.metric, Metric::Cosine { provider } if provider == REMOTE_ID))
    }

    /// Resolves every component id and builds the pipeline. A remote embedder
    /// is contacted only when a similarity member asks for it.
    pub fn build_pipeline(&self) -> Result<Pipeline> {
        let mut providers = ProviderRegistry::default();
        if self.uses_remote_provider() {
            let url = self.remote.embed_url.as_deref().ok_or_else(|| {
                Error::Config(format!(
                    "similarity member uses provider `{REMOTE_ID}` but no embed URL is set \
                     (remote.embed_url or {EMBED_URL_ENV})"
                ))
            })?;
            providers.register(Arc::new(RemoteEmbedder::connect(url)?));
        }
        let mut readers = ReaderRegistry::default();
        for (id, url) in &self.remote.readers {
            readers.register(Arc::new(RemoteReader::new(id.clone(), url.clone())));
        }
        Pipeline::new(self.pipeline.clone(), providers, readers)
    }
}
