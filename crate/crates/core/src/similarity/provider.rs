//! Embedding providers: the built-in hashed TF-IDF encoder and a client for
//! remote encoders speaking the `/health` + `/embed` JSON protocol.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::EmbeddingVector;
use crate::corpus::{token_surfaces, Document};
use crate::error::{Error, Result};

/// Maps texts to fixed-dimension vectors. Implementations must be
/// deterministic and safe to call from several threads at once.
pub trait EmbeddingProvider: Send + Sync {
    fn provider_id(&self) -> &str;

    fn dimension(&self) -> usize;

    /// Embeds `texts`. `collection` is the document whose sentences are being
    /// ranked; providers that need corpus statistics read it, others ignore it.
    fn embed(&self, texts: &[&str], collection: &Document) -> Result<Vec<EmbeddingVector>>;
}

pub const HASHED_TFIDF_ID: &str = "hashed_tfidf";
pub const REMOTE_ID: &str = "remote";
pub const DEFAULT_HASH_DIMENSION: usize = 256;

/// TF-IDF weights over the collection's sentences, hashed into `dimension`
/// buckets with 64-bit FNV-1a, high half folded into the low half.
#[derive(Debug, Clone)]
pub struct HashedTfIdf {
    dimension: usize,
}

impl HashedTfIdf {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("hash dimension must be at least 1".into()));
        }
        Ok(Self { dimension })
    }
}

impl Default for HashedTfIdf {
    fn default() -> Self {
        Self {
            dimension: DEFAULT_HASH_DIMENSION,
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Smoothed inverse document frequency over a document's sentences.
#[derive(Debug, Clone)]
pub struct IdfTable {
    num_sentences: usize,
    df: HashMap<String, usize>,
}

impl IdfTable {
    pub fn from_document(doc: &Document) -> Self {
        let mut df: HashMap<String, usize> = HashMap::new();
        for s in doc.sentences() {
            let distinct: HashSet<&str> = s.tokens().iter().map(|t| t.surface.as_str()).collect();
            for t in distinct {
                *df.entry(t.to_string()).or_insert(0) += 1;
            }
        }
        Self {
            num_sentences: doc.len(),
            df,
        }
    }

    /// `ln((1 + N) / (1 + df)) + 1`; never below 1.
    pub fn idf(&self, term: &str) -> f64 {
        let df = self.df.get(term).copied().unwrap_or(0);
        ((1 + self.num_sentences) as f64 / (1 + df) as f64).ln() + 1.0
    }
}

impl EmbeddingProvider for HashedTfIdf {
    fn provider_id(&self) -> &str {
        HASHED_TFIDF_ID
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[&str], collection: &Document) -> Result<Vec<EmbeddingVector>> {
        let idf = IdfTable::from_document(collection);
        Ok(texts
            .iter()
            .map(|text| {
                let mut tf: BTreeMap<String, usize> = BTreeMap::new();
                for t in token_surfaces(text) {
                    *tf.entry(t).or_insert(0) += 1;
                }
                let mut values = vec![0.0; self.dimension];
                for (term, count) in &tf {
                    let h = fnv1a(term.as_bytes());
                    let bucket = ((h ^ (h >> 32)) % self.dimension as u64) as usize;
                    values[bucket] += *count as f64 * idf.idf(term);
                }
                EmbeddingVector {
                    values,
                    provider_id: HASHED_TFIDF_ID.to_string(),
                }
            })
            .collect())
    }
}

/// Largest batch the remote protocol accepts.
pub const MAX_EMBED_BATCH: usize = 256;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EmbedRequest {
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EmbedResponse {
    pub model_id: String,
    pub dimension: usize,
    pub embeddings: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HealthResponse {
    pub status: String,
    pub model_id: String,
    pub dimension: usize,
}

/// Client for an external sentence encoder.
pub struct RemoteEmbedder {
    base_url: String,
    agent: ureq::Agent,
    model_id: String,
    dimension: usize,
}

impl std::fmt::Debug for RemoteEmbedder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteEmbedder")
            .field("base_url", &self.base_url)
            .field("model_id", &self.model_id)
            .field("dimension", &self.dimension)
            .finish()
    }
}

fn remote_err(url: &str, e: impl std::fmt::Display) -> Error {
    Error::Remote {
        url: url.to_string(),
        message: e.to_string(),
    }
}

impl RemoteEmbedder {
    /// Queries `/health` and fails unless the server reports a usable model.
    pub fn connect(base_url: &str) -> Result<Self> {
        let base_url = base_url.trim_end_matches('/').to_string();
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        let url = format!("{base_url}/health");
        let health: HealthResponse = agent
            .get(&url)
            .call()
            .map_err(|e| Error::ProviderUnavailable(format!("{url}: {e}")))?
            .body_mut()
            .read_json()
            .map_err(|e| remote_err(&url, e))?;
        if health.dimension == 0 {
            return Err(remote_err(&url, "server reports dimension 0"));
        }
        Ok(Self {
            base_url,
            agent,
            model_id: health.model_id,
            dimension: health.dimension,
        })
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        let url = format!("{}/embed", self.base_url);
        let request = EmbedRequest {
            texts: texts.iter().map(|t| t.to_string()).collect(),
        };
        let response: EmbedResponse = self
            .agent
            .post(&url)
            .send_json(&request)
            .map_err(|e| remote_err(&url, e))?
            .body_mut()
            .read_json()
            .map_err(|e| remote_err(&url, e))?;
        if response.embeddings.len() != texts.len() {
            return Err(remote_err(
                &url,
                format!(
                    "{} embeddings returned for {} texts",
                    response.embeddings.len(),
                    texts.len()
                ),
            ));
        }
        response
            .embeddings
            .into_iter()
            .map(|values| {
                if values.len() != self.dimension {
                    return Err(Error::DimensionMismatch {
                        expected: self.dimension,
                        actual: values.len(),
                    });
                }
                EmbeddingVector::new(REMOTE_ID, values)
            })
            .collect()
    }
}

impl EmbeddingProvider for RemoteEmbedder {
    fn provider_id(&self) -> &str {
        REMOTE_ID
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[&str], _collection: &Document) -> Result<Vec<EmbeddingVector>> {
        if let Some(i) = texts.iter().position(|t| t.is_empty()) {
            return Err(Error::InvalidInput(format!(
                "text {i} is empty; the embedding protocol rejects empty strings"
            )));
        }
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(MAX_EMBED_BATCH) {
            out.extend(self.embed_batch(chunk)?);
        }
        Ok(out)
    }
}

/// Providers addressable by id from a similarity configuration.
#[derive(Clone)]
pub struct ProviderRegistry {
    providers: BTreeMap<String, Arc<dyn EmbeddingProvider>>,
}

impl std::fmt::Debug for ProviderRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.providers.keys()).finish()
    }
}

impl Default for ProviderRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(HashedTfIdf::default()));
        r
    }
}

impl ProviderRegistry {
    pub fn empty() -> Self {
        Self {
            providers: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, provider: Arc<dyn EmbeddingProvider>) {
        self.providers
            .insert(provider.provider_id().to_string(), provider);
    }

    pub fn get(&self, provider_id: &str) -> Result<&Arc<dyn EmbeddingProvider>> {
        self.providers
            .get(provider_id)
            .ok_or_else(|| Error::ProviderUnavailable(provider_id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.providers.keys().map(String::as_str)
    }
}
