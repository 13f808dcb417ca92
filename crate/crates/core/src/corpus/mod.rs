//! Data model for documents, multiple-choice items and datasets.

mod load;
mod stats;
mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use load::{load_dataset, write_normalized, DataFormat, DOCUMENTS_FILE, ITEMS_FILE};
pub use stats::{dataset_stats, StatsReport};
pub use text::{normalized_text, segment_sentences, token_surfaces, tokenize, word_count, Token};

/// Longest gold span expected for MovieQA-style data.
pub const MAX_ALIGNMENT_SPAN: usize = 5;

/// One sentence of a document. Tokens are computed once at construction and
/// always equal `tokenize(text)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    index: usize,
    text: String,
    tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(index: usize, text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Self {
            index,
            text,
            tokens,
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn token_surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    pub fn len_tokens(&self) -> usize {
        self.tokens.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    sentences: Vec<Sentence>,
}

impl Document {
    /// Builds a document from sentence strings, assigning indices in order.
    /// Every sentence must be non-empty after trimming.
    pub fn new<S: Into<String>>(
        doc_id: impl Into<String>,
        title: impl Into<String>,
        sentences: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let doc_id = doc_id.into();
        let sentences: Vec<Sentence> = sentences
            .into_iter()
            .enumerate()
            .map(|(i, s)| Sentence::new(i, s))
            .collect();
        if let Some(bad) = sentences.iter().find(|s| s.text.trim().is_empty()) {
            return Err(Error::Schema(format!(
                "document {doc_id}: sentence {} is empty",
                bad.index
            )));
        }
        Ok(Self {
            doc_id,
            title: title.into(),
            sentences,
        })
    }

    /// Segments raw plot text into sentences.
    pub fn from_raw_text(doc_id: impl Into<String>, title: impl Into<String>, text: &str) -> Self {
        Self {
            doc_id: doc_id.into(),
            title: title.into(),
            sentences: segment_sentences(text),
        }
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn sentence(&self, index: usize) -> Option<&Sentence> {
        self.sentences.get(index)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAItem {
    pub qid: String,
    pub doc_id: String,
    pub question: String,
    pub choices: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_alignment: Option<Vec<usize>>,
}

impl QAItem {
    pub fn is_labeled(&self) -> bool {
        self.correct_index.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "val" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split {other:?}"))),
        }
    }
}

/// A validated split: every item resolves to a non-empty document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub split: Split,
    documents: BTreeMap<String, Document>,
    items: Vec<QAItem>,
}

impl Dataset {
    pub fn new(
        split: Split,
        documents: impl IntoIterator<Item = Document>,
        items: Vec<QAItem>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for doc in documents {
            let id = doc.doc_id.clone();
            if map.insert(id.clone(), doc).is_some() {
                return Err(Error::Schema(format!("duplicate document id {id}")));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for item in &items {
            if !seen.insert(item.qid.as_str()) {
                return Err(Error::Schema(format!("duplicate qid {}", item.qid)));
            }
            let doc = map.get(&item.doc_id).ok_or_else(|| Error::DanglingDocument {
                qid: item.qid.clone(),
                doc_id: item.doc_id.clone(),
            })?;
            validate_item(item, doc)?;
        }
        Ok(Self {
            split,
            documents: map,
            items,
        })
    }

    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.documents.values()
    }

    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.documents.get(doc_id)
    }

    pub fn items(&self) -> &[QAItem] {
        &self.items
    }

    pub fn item(&self, qid: &str) -> Result<&QAItem> {
        self.items
            .iter()
            .find(|i| i.qid == qid)
            .ok_or_else(|| Error::UnknownQid(qid.to_string()))
    }

    /// Document of an item; valid by construction.
    pub fn document_of(&self, item: &QAItem) -> &Document {
        &self.documents[&item.doc_id]
    }

    pub fn num_documents(&self) -> usize {
        self.documents.len()
    }
}

fn validate_item(item: &QAItem, doc: &Document) -> Result<()> {
    let n = item.choices.len();
    if n < 2 {
        // single-choice items cannot be evaluated meaningfully
        return Err(Error::Schema(format!(
            "item {}: needs at least 2 choices, found {n}",
            item.qid
        )));
    }
    if item.question.trim().is_empty() {
        return Err(Error::Schema(format!("item {}: empty question", item.qid)));
    }
    if let Some(ci) = item.correct_index {
        if ci >= n {
            return Err(Error::Schema(format!(
                "item {}: correct_index {ci} out of range for {n} choices",
                item.qid
            )));
        }
    }
    if doc.is_empty() {
        return Err(Error::Schema(format!(
            "item {}: document {} has no sentences",
            item.qid, doc.doc_id
        )));
    }
    if let Some(gold) = &item.gold_alignment {
        if let Some(&bad) = gold.iter().find(|&&g| g >= doc.len()) {
            return Err(Error::Schema(format!(
                "item {}: gold alignment index {bad} outside document {} ({} sentences)",
                item.qid,
                doc.doc_id,
                doc.len()
            )));
        }
        if !is_consecutive_span(gold) {
            log::warn!(
                "item {}: gold alignment {:?} is not a consecutive span of at most {} sentences",
                item.qid,
                gold,
                MAX_ALIGNMENT_SPAN
            );
        }
    }
    Ok(())
}

fn is_consecutive_span(indices: &[usize]) -> bool {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    match (sorted.first(), sorted.last()) {
        (Some(&lo), Some(&hi)) => {
            hi - lo + 1 == sorted.len() && sorted.len() <= MAX_ALIGNMENT_SPAN
        }
        _ => true,
    }
}
