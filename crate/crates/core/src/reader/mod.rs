//! Readers turn a budgeted context plus a question and its choices into a
//! probability distribution over the choices.

mod lexical;
mod remote;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::selector::SelectedContext;

pub use lexical::{LexicalReader, LEXICAL_ID};
pub use remote::{RemoteReader, ScoreRequest, ScoreResponse};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceDistribution {
    pub qid: String,
    pub probabilities: Vec<f64>,
    pub reader_id: String,
}

impl ChoiceDistribution {
    /// Validates that every entry is in `[0, 1]` and the total is 1 (±1e-9).
    pub fn new(
        qid: impl Into<String>,
        reader_id: impl Into<String>,
        probabilities: Vec<f64>,
    ) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidInput("empty choice distribution".into()));
        }
        if probabilities
            .iter()
            .any(|p| !p.is_finite() || !(0.0..=1.0).contains(p))
        {
            return Err(Error::InvalidInput(format!(
                "probabilities out of [0, 1]: {probabilities:?}"
            )));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self {
            qid: qid.into(),
            probabilities,
            reader_id: reader_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

/// Everything a reader may look at for one question.
#[derive(Debug, Clone, Copy)]
pub struct ReaderInput<'a> {
    pub doc: &'a Document,
    pub context: &'a SelectedContext,
    pub question: &'a str,
    pub choices: &'a [String],
}

/// A reader scores every choice; higher logits mean more likely.
///
/// Implementations must be deterministic for fixed inputs, accept any
/// number of choices from 2 up, and tolerate concurrent calls.
pub trait Reader: Send + Sync {
    fn reader_id(&self) -> &str;

    fn score_choices(&self, input: &ReaderInput<'_>) -> Result<Vec<f64>>;
}

/// Runs a reader and checks the shape of what it returned.
pub fn score_choices(reader: &dyn Reader, input: &ReaderInput<'_>) -> Result<Vec<f64>> {
    if input.choices.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "{}: readers need at least 2 choices, got {}",
            input.context.qid,
            input.choices.len()
        )));
    }
    let logits = reader.score_choices(input)?;
    if logits.len() != input.choices.len() {
        return Err(Error::LengthMismatch(format!(
            "reader {} returned {} logits for {} choices",
            reader.reader_id(),
            logits.len(),
            input.choices.len()
        )));
    }
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "reader {} returned non-finite logits",
            reader.reader_id()
        )));
    }
    Ok(logits)
}

pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    softmax_with_temperature(logits, 1.0)
}

/// `exp(zᵢ/T) / Σⱼ exp(zⱼ/T)` with the maximum subtracted first.
pub fn softmax_with_temperature(logits: &[f64], temperature: f64) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::InvalidInput("softmax of an empty vector".into()));
    }
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidInput("softmax input must be finite".into()));
    }
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::Config(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits
        .iter()
        .map(|z| ((z - max) / temperature).exp())
        .collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub fn predict(dist: &ChoiceDistribution) -> usize {
    argmax(&dist.probabilities)
}

/// Readers addressable by id.
#[derive(Clone)]
pub struct ReaderRegistry {
    readers: BTreeMap<String, Arc<dyn Reader>>,
}

impl std::fmt::Debug for ReaderRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.readers.keys()).finish()
    }
}

impl Default for ReaderRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(LexicalReader));
        r
    }
}

impl ReaderRegistry {
    pub fn empty() -> Self {
        Self {
            readers: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, reader: Arc<dyn Reader>) {
        self.readers.insert(reader.reader_id().to_string(), reader);
    }

    pub fn get(&self, reader_id: &str) -> Result<&Arc<dyn Reader>> {
        self.readers
            .get(reader_id)
            .ok_or_else(|| Error::ReaderUnavailable(reader_id.to_string()))
    }
}
