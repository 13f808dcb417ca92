use serde::{Deserialize, Serialize};

use crate::corpus::{Document, QAItem};
use crate::ensemble::{self, EnsembleConfig};
use crate::error::{Error, Result};
use crate::reader::{
    predict, score_choices, softmax_with_temperature, ChoiceDistribution, ReaderInput,
    ReaderRegistry, LEXICAL_ID,
};
use crate::selector::{
    build_query, enforce_token_budget, select_top_k, BudgetConfig, QueryMode, QueryText,
    ScoredSentence, SelectedContext, Vocabulary,
};
use crate::similarity::{score_sentences_detailed, ProviderRegistry, SentenceScores, SimilarityModelConfig};

fn default_reader() -> String {
    LEXICAL_ID.to_string()
}

fn default_temperature() -> f64 {
    1.0
}

/// Every knob that influences a prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default)]
    pub similarity: SimilarityModelConfig,
    #[serde(default)]
    pub query_mode: QueryMode,
    #[serde(default = "default_reader")]
    pub reader: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            budget: BudgetConfig::default(),
            similarity: SimilarityModelConfig::default(),
            query_mode: QueryMode::default(),
            reader: default_reader(),
            ensemble: None,
            temperature: default_temperature(),
        }
    }
}

impl PipelineConfig {
    /// Reader ids consulted per question.
    pub fn reader_ids(&self) -> Vec<&str> {
        match &self.ensemble {
            Some(e) => e.members.iter().map(String::as_str).collect(),
            None => vec![self.reader.as_str()],
        }
    }

    /// Label used in reports and tables.
    pub fn model_label(&self) -> String {
        match &self.ensemble {
            None => self.reader.clone(),
            Some(e) => {
                let rule = match e.rule {
                    ensemble::EnsembleRule::Majority => "majority",
                    ensemble::EnsembleRule::MeanProbability => "mean_probability",
                };
                format!("ensemble[{rule}]({})", e.members.join(","))
            }
        }
    }
}

/// Query construction, scoring and top-k selection.
#[derive(Debug, Clone)]
pub struct Selector {
    pub similarity: SimilarityModelConfig,
    pub budget: BudgetConfig,
    pub query_mode: QueryMode,
    pub providers: ProviderRegistry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub queries: Vec<QueryText>,
    /// Scores per query, in query order.
    pub per_query: Vec<SentenceScores>,
    /// Score per sentence, the best over all queries, in document order.
    pub combined: Vec<ScoredSentence>,
    /// Top-k in document order.
    pub selected: Vec<ScoredSentence>,
}

impl Selector {
    pub fn new(
        similarity: SimilarityModelConfig,
        budget: BudgetConfig,
        query_mode: QueryMode,
        providers: ProviderRegistry,
    ) -> Result<Self> {
        budget.validate()?;
        similarity.validate(&providers)?;
        Ok(Self {
            similarity,
            budget,
            query_mode,
            providers,
        })
    }

    pub fn select(&self, doc: &Document, item: &QAItem) -> Result<Selection> {
        let queries = build_query(item, self.query_mode);
        let per_query = queries
            .iter()
            .map(|q| score_sentences_detailed(&self.similarity, &q.text, doc, &self.providers))
            .collect::<Result<Vec<_>>>()?;
        let mut combined = per_query[0].combined.clone();
        for scores in &per_query[1..] {
            for (c, s) in combined.iter_mut().zip(&scores.combined) {
                c.score = c.score.max(s.score);
            }
        }
        let selected = select_top_k(&combined, self.budget.k);
        Ok(Selection {
            queries,
            per_query,
            combined,
            selected,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberOutput {
    pub reader_id: String,
    pub logits: Vec<f64>,
    pub distribution: ChoiceDistribution,
}

/// Full evidence chain for one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemOutcome {
    pub qid: String,
    pub selection: Selection,
    pub context: SelectedContext,
    pub members: Vec<MemberOutput>,
    pub distribution: ChoiceDistribution,
    pub predicted: usize,
}

/// Selector plus readers, resolved and validated.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    selector: Selector,
    readers: ReaderRegistry,
}

impl Pipeline {
    pub fn new(
        config: PipelineConfig,
        providers: ProviderRegistry,
        readers: ReaderRegistry,
    ) -> Result<Self> {
        if let Some(e) = &config.ensemble {
            e.validate()?;
        }
        for id in config.reader_ids() {
            readers.get(id)?;
        }
        if !(config.temperature.is_finite() && config.temperature > 0.0) {
            return Err(Error::Config(format!(
                "temperature must be positive, got {}",
                config.temperature
            )));
        }
        let selector = Selector::new(
            config.similarity.clone(),
            config.budget,
            config.query_mode,
            providers,
        )?;
        Ok(Self {
            config,
            selector,
            readers,
        })
    }

    /// Built-in providers and readers only.
    pub fn with_defaults(config: PipelineConfig) -> Result<Self> {
        Self::new(config, ProviderRegistry::default(), ReaderRegistry::default())
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn selector(&self) -> &Selector {
        &self.selector
    }

    pub fn run_item(&self, doc: &Document, item: &QAItem, vocab: &Vocabulary) -> Result<ItemOutcome> {
        let selection = self.selector.select(doc, item)?;
        let context =
            enforce_token_budget(&item.qid, &selection.selected, doc, &self.config.budget, vocab)?;
        let input = ReaderInput {
            doc,
            context: &context,
            question: &item.question,
            choices: &item.choices,
        };

        let mut members = Vec::new();
        for id in self.config.reader_ids() {
            let reader = self.readers.get(id)?;
            let logits = score_choices(reader.as_ref(), &input)?;
            let probs = softmax_with_temperature(&logits, self.config.temperature)?;
            members.push(MemberOutput {
                reader_id: id.to_string(),
                logits,
                distribution: ChoiceDistribution::new(&item.qid, id, probs)?,
            });
        }

        let (predicted, distribution) = match &self.config.ensemble {
            None => {
                let d = members[0].distribution.clone();
                (predict(&d), d)
            }
            Some(e) => {
                let dists: Vec<ChoiceDistribution> =
                    members.iter().map(|m| m.distribution.clone()).collect();
                ensemble::decide(&dists, &e.weights(), e.rule)?
            }
        };
        Ok(ItemOutcome {
            qid: item.qid.clone(),
            selection,
            context,
            members,
            distribution,
            predicted,
        })
    }
}
