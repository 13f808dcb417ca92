//! Sentence-pair similarity: embedding cosine, string metrics, and the
//! normalize-then-combine scheme that merges several similarity models.

mod metrics;
mod provider;

use serde::{Deserialize, Serialize};

use crate::corpus::{normalized_text, Document};
use crate::error::{Error, Result};
use crate::selector::ScoredSentence;

pub use metrics::{
    cosine_similarity, edit_distance, levenshtein_similarity, normalize_scores, qgram_similarity,
    Normalized, SimilarityScore,
};
pub use provider::{
    EmbedRequest, EmbedResponse, EmbeddingProvider, HashedTfIdf, HealthResponse, IdfTable,
    ProviderRegistry, RemoteEmbedder, DEFAULT_HASH_DIMENSION, HASHED_TFIDF_ID, MAX_EMBED_BATCH,
    REMOTE_ID,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub provider_id: String,
}

impl EmbeddingVector {
    pub fn new(provider_id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("embedding dimension must be at least 1".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("embedding contains non-finite values".into()));
        }
        Ok(Self {
            values,
            provider_id: provider_id.into(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "snake_case")]
pub enum Metric {
    Cosine { provider: String },
    Levenshtein,
    Qgram { q: usize },
}

impl Metric {
    pub fn metric_id(&self) -> String {
        match self {
            Metric::Cosine { provider } => format!("cosine:{provider}"),
            Metric::Levenshtein => "levenshtein".to_string(),
            Metric::Qgram { q } => format!("qgram:{q}"),
        }
    }
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMember {
    #[serde(flatten)]
    pub metric: Metric,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    SumToOne,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combination {
    #[default]
    WeightedMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityModelConfig {
    pub members: Vec<SimilarityMember>,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub combination: Combination,
}

impl Default for SimilarityModelConfig {
    /// Hashed TF-IDF cosine and character trigram profiles, equally weighted.
    fn default() -> Self {
        Self {
            members: vec![
                SimilarityMember {
                    metric: Metric::Cosine {
                        provider: HASHED_TFIDF_ID.to_string(),
                    },
                    weight: 1.0,
                },
                SimilarityMember {
                    metric: Metric::Qgram { q: 3 },
                    weight: 1.0,
                },
            ],
            normalization: Normalization::SumToOne,
            combination: Combination::WeightedMean,
        }
    }
}

impl SimilarityModelConfig {
    pub fn single(metric: Metric) -> Self {
        Self {
            members: vec![SimilarityMember {
                metric,
                weight: 1.0,
            }],
            ..Self::default()
        }
    }

    pub fn validate(&self, providers: &ProviderRegistry) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::Config("similarity model needs at least one member".into()));
        }
        for m in &self.members {
            if !(m.weight.is_finite() && m.weight > 0.0) {
                return Err(Error::Config(format!(
                    "similarity member {} has non-positive weight {}",
                    m.metric.metric_id(),
                    m.weight
                )));
            }
            match &m.metric {
                Metric::Cosine { provider } => {
                    providers.get(provider)?;
                }
                Metric::Qgram { q: 0 } => {
                    return Err(Error::Config("q-gram length must be at least 1".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// One member's scores over every sentence of a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberScores {
    pub metric_id: String,
    pub weight: f64,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScores {
    pub members: Vec<MemberScores>,
    pub combined: Vec<ScoredSentence>,
}

fn raw_member_scores(
    metric: &Metric,
    query: &str,
    doc: &Document,
    providers: &ProviderRegistry,
) -> Result<Vec<f64>> {
    let sentences = doc.sentences();
    match metric {
        Metric::Cosine { provider } => {
            let provider = providers.get(provider)?;
            let mut texts: Vec<&str> = Vec::with_capacity(sentences.len() + 1);
            texts.push(query);
            texts.extend(sentences.iter().map(|s| s.text()));
            let vectors = provider.embed(&texts, doc)?;
            if vectors.len() != texts.len() {
                return Err(Error::LengthMismatch(format!(
                    "provider {} returned {} vectors for {} texts",
                    provider.provider_id(),
                    vectors.len(),
                    texts.len()
                )));
            }
            for v in &vectors {
                if v.dimension() != provider.dimension() {
                    return Err(Error::DimensionMismatch {
                        expected: provider.dimension(),
                        actual: v.dimension(),
                    });
                }
            }
            let (q, rest) = vectors.split_first().expect("query vector present");
            rest.iter()
                .zip(sentences)
                .map(|(v, s)| match cosine_similarity(q, v) {
                    Ok(score) => Ok(score.value),
                    // a sentence that is pure punctuation has nothing to embed
                    Err(Error::ZeroVector { .. })
                        if s.len_tokens() == 0 && v.values.iter().all(|&x| x == 0.0) =>
                    {
                        Ok(0.0)
                    }
                    Err(e) => Err(e),
                })
                .collect()
        }
        Metric::Levenshtein => {
            let q = normalized_text(query);
            Ok(sentences
                .iter()
                .map(|s| levenshtein_similarity(&q, &normalized_text(s.text())).value)
                .collect())
        }
        Metric::Qgram { q: n } => {
            let q = normalized_text(query);
            sentences
                .iter()
                .map(|s| Ok(qgram_similarity(&q, &normalized_text(s.text()), *n)?.value))
                .collect()
        }
    }
}

/// Scores every sentence of `doc` against `query`, keeping each member's
/// raw and normalized scores alongside the combined result.
pub fn score_sentences_detailed(
    config: &SimilarityModelConfig,
    query: &str,
    doc: &Document,
    providers: &ProviderRegistry,
) -> Result<SentenceScores> {
    if doc.is_empty() {
        return Err(Error::InvalidInput(format!(
            "document {} has no sentences to score",
            doc.doc_id
        )));
    }
    config.validate(providers)?;

    let mut members = Vec::with_capacity(config.members.len());
    for m in &config.members {
        let raw = raw_member_scores(&m.metric, query, doc, providers)?;
        let norm = normalize_scores(&raw)?;
        members.push(MemberScores {
            metric_id: m.metric.metric_id(),
            weight: m.weight,
            raw,
            normalized: norm.values,
            degenerate: norm.degenerate,
        });
    }

    let total_weight: f64 = members.iter().map(|m| m.weight).sum();
    let combined = (0..doc.len())
        .map(|i| ScoredSentence {
            sentence_index: i,
            score: members.iter().map(|m| m.weight * m.normalized[i]).sum::<f64>() / total_weight,
        })
        .collect();
    Ok(SentenceScores { members, combined })
}

/// Combined member scores per sentence, in document order.
pub fn score_sentences(
    config: &SimilarityModelConfig,
    query: &str,
    doc: &Document,
    providers: &ProviderRegistry,
) -> Result<Vec<ScoredSentence>> {
    Ok(score_sentences_detailed(config, query, doc, providers)?.combined)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(sentences: &[&str]) -> Document {
        Document::new("d", "D", sentences.iter().copied()).unwrap()
    }

    #[test]
    fn single_sentence_normalizes_to_one() {
        let d = doc(&["Forrest runs."]);
        for metric in [
            Metric::Cosine {
                provider: HASHED_TFIDF_ID.into(),
            },
            Metric::Levenshtein,
            Metric::Qgram { q: 2 },
        ] {
            let s = score_sentences(
                &SimilarityModelConfig::single(metric),
                "who runs",
                &d,
                &ProviderRegistry::default(),
            )
            .unwrap();
            assert_eq!(s.len(), 1);
            assert!((s[0].score - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn combined_is_weighted_mean_of_normalized_members() {
        let d = doc(&["alpha beta gamma", "delta", "beta"]);
        let cfg = SimilarityModelConfig {
            members: vec![
                SimilarityMember {
                    metric: Metric::Levenshtein,
                    weight: 1.0,
                },
                SimilarityMember {
                    metric: Metric::Qgram { q: 2 },
                    weight: 3.0,
                },
            ],
            ..Default::default()
        };
        let detail =
            score_sentences_detailed(&cfg, "beta gamma", &d, &ProviderRegistry::default()).unwrap();
        for (i, c) in detail.combined.iter().enumerate() {
            let want = (detail.members[0].normalized[i] + 3.0 * detail.members[1].normalized[i]) / 4.0;
            assert!((c.score - want).abs() < 1e-12);
            assert!(c.score >= 0.0);
        }
        let sum: f64 = detail.combined.iter().map(|c| c.score).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn punctuation_only_sentence_scores_zero_under_cosine() {
        let d = doc(&["Forrest runs.", "...", "Jenny sits."]);
        let cfg = SimilarityModelConfig::single(Metric::Cosine {
            provider: HASHED_TFIDF_ID.into(),
        });
        let s = score_sentences(&cfg, "Forrest", &d, &ProviderRegistry::default()).unwrap();
        assert_eq!(s[1].score, 0.0);
        assert!(s[0].score > s[2].score);
    }

    #[test]
    fn unknown_provider_and_bad_weights_rejected() {
        let d = doc(&["a b"]);
        let reg = ProviderRegistry::default();
        let cfg = SimilarityModelConfig::single(Metric::Cosine {
            provider: "clinical_bert".into(),
        });
        assert!(matches!(
            score_sentences(&cfg, "a", &d, &reg),
            Err(Error::ProviderUnavailable(_))
        ));
        let mut cfg = SimilarityModelConfig::single(Metric::Levenshtein);
        cfg.members[0].weight = 0.0;
        assert!(matches!(score_sentences(&cfg, "a", &d, &reg), Err(Error::Config(_))));
        let empty = SimilarityModelConfig {
            members: vec![],
            ..Default::default()
        };
        assert!(score_sentences(&empty, "a", &d, &reg).is_err());
    }

    #[test]
    fn config_round_trips_through_toml_shape() {
        let cfg = SimilarityModelConfig::default();
        let json = serde_json::to_value(&cfg).unwrap();
        assert_eq!(json["members"][0]["metric"], "cosine");
        assert_eq!(json["members"][0]["provider"], HASHED_TFIDF_ID);
        assert_eq!(json["members"][1]["q"], 3);
        let back: SimilarityModelConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back, cfg);
    }
}
