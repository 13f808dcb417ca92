//! Fitting selected sentences into a fixed-length, zero-padded token row.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{by_priority, ScoredSentence};
use crate::corpus::{token_surfaces, Dataset, Document};
use crate::error::{Error, Result};

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetConfig {
    pub k: usize,
    pub max_tokens: usize,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self {
            k: 5,
            max_tokens: 130,
        }
    }
}

impl BudgetConfig {
    pub fn new(k: usize, max_tokens: usize) -> Result<Self> {
        let cfg = Self { k, max_tokens };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.max_tokens < self.k {
            return Err(Error::Config(format!(
                "max_tokens ({}) must be at least k ({})",
                self.max_tokens, self.k
            )));
        }
        Ok(())
    }
}

/// Token ids with 0 for padding and 1 for unknown; corpus tokens get ids
/// from 2 upward in lexicographic order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    ids: BTreeMap<String, u32>,
}

impl Vocabulary {
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut ids: BTreeMap<String, u32> = tokens.into_iter().map(|t| (t.into(), 0)).collect();
        for (next, id) in (UNK_ID + 1..).zip(ids.values_mut()) {
            *id = next;
        }
        Self { ids }
    }

    /// Every token of every sentence, question and choice in the dataset.
    pub fn from_dataset(ds: &Dataset) -> Self {
        let mut tokens: Vec<String> = Vec::new();
        for doc in ds.documents() {
            for s in doc.sentences() {
                tokens.extend(s.tokens().iter().map(|t| t.surface.clone()));
            }
        }
        for item in ds.items() {
            tokens.extend(token_surfaces(&item.question));
            for c in &item.choices {
                tokens.extend(token_surfaces(c));
            }
        }
        Self::from_tokens(tokens)
    }

    pub fn id(&self, token: &str) -> u32 {
        self.ids.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Maps tokens to ids and pads with [`PAD_ID`] to `length`. Tokens past
/// `length` are dropped.
pub fn token_ids_of<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary, length: usize) -> Vec<u32> {
    let mut ids: Vec<u32> = tokens
        .iter()
        .take(length)
        .map(|t| vocab.id(t.as_ref()))
        .collect();
    ids.resize(length, PAD_ID);
    ids
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub sentence_index: usize,
    pub original_tokens: usize,
    pub kept_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedContext {
    pub qid: String,
    /// Document order.
    pub selected: Vec<ScoredSentence>,
    /// Surviving tokens of each selected sentence, parallel to `selected`.
    pub sentence_tokens: Vec<Vec<String>>,
    pub truncations: Vec<Truncation>,
    /// Exactly `max_tokens` long; positions from `real_token_count` on are [`PAD_ID`].
    pub token_ids: Vec<u32>,
    pub real_token_count: usize,
}

impl SelectedContext {
    pub fn sentence_indices(&self) -> Vec<usize> {
        self.selected.iter().map(|s| s.sentence_index).collect()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentence_tokens.iter().flatten().map(String::as_str)
    }

    pub fn contains_sentence(&self, index: usize) -> bool {
        self.selected.iter().any(|s| s.sentence_index == index)
    }
}

/// Concatenates the selected sentences' tokens and trims the result to
/// `cfg.max_tokens`. Tokens come off the tail of the lowest-scored sentence
/// first; a sentence is cut to one token before the next-lowest is touched.
pub fn enforce_token_budget(
    qid: &str,
    selected: &[ScoredSentence],
    doc: &Document,
    cfg: &BudgetConfig,
    vocab: &Vocabulary,
) -> Result<SelectedContext> {
    let mut selected = selected.to_vec();
    selected.sort_by_key(|s| s.sentence_index);
    let mut tokens: Vec<Vec<String>> = Vec::with_capacity(selected.len());
    for s in &selected {
        let sentence = doc.sentence(s.sentence_index).ok_or_else(|| {
            Error::InvalidInput(format!(
                "sentence {} outside document {} ({} sentences)",
                s.sentence_index,
                doc.doc_id,
                doc.len()
            ))
        })?;
        tokens.push(sentence.tokens().iter().map(|t| t.surface.clone()).collect());
    }

    let original: Vec<usize> = tokens.iter().map(Vec::len).collect();
    let total: usize = original.iter().sum();
    let mut excess = total.saturating_sub(cfg.max_tokens);

    let mut lowest_first: Vec<usize> = (0..selected.len()).collect();
    lowest_first.sort_by(|&a, &b| by_priority(&selected[b], &selected[a]));

    // floor of one token per sentence, then zero if the budget is smaller
    // than the number of selected sentences
    for floor in [1usize, 0] {
        for &i in &lowest_first {
            if excess == 0 {
                break;
            }
            let cut = tokens[i].len().saturating_sub(floor).min(excess);
            let keep = tokens[i].len() - cut;
            tokens[i].truncate(keep);
            excess -= cut;
        }
    }

    let truncations = selected
        .iter()
        .zip(&original)
        .zip(&tokens)
        .filter(|((_, &orig), kept)| kept.len() < orig)
        .map(|((s, &orig), kept)| Truncation {
            sentence_index: s.sentence_index,
            original_tokens: orig,
            kept_tokens: kept.len(),
        })
        .collect();

    let flat: Vec<&str> = tokens.iter().flatten().map(String::as_str).collect();
    let real_token_count = flat.len().min(cfg.max_tokens);
    Ok(SelectedContext {
        qid: qid.to_string(),
        token_ids: token_ids_of(&flat, vocab, cfg.max_tokens),
        selected,
        sentence_tokens: tokens,
        truncations,
        real_token_count,
    })
}

/// Inspection record for one selected context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextRecord {
    pub qid: String,
    pub sentence_indices: Vec<usize>,
    pub scores: Vec<f64>,
    pub real_token_count: usize,
}

impl From<&SelectedContext> for ContextRecord {
    fn from(ctx: &SelectedContext) -> Self {
        Self {
            qid: ctx.qid.clone(),
            sentence_indices: ctx.sentence_indices(),
            scores: ctx.selected.iter().map(|s| s.score).collect(),
            real_token_count: ctx.real_token_count,
        }
    }
}

pub fn write_contexts<'a>(
    path: &Path,
    contexts: impl IntoIterator<Item = &'a SelectedContext>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for ctx in contexts {
        serde_json::to_writer(&mut w, &ContextRecord::from(ctx))
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
