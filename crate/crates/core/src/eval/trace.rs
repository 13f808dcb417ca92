use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ItemOutcome, MemberOutput, Pipeline};
use crate::corpus::Dataset;
use crate::error::Result;
use crate::selector::{Truncation, Vocabulary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracedSentence {
    pub index: usize,
    pub text: String,
    pub score: f64,
    pub selected: bool,
    pub gold: bool,
}

/// Evidence chain for one question: every sentence score, what was selected
/// and cut, what each reader said, and the verdict when a label exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub qid: String,
    pub doc_id: String,
    pub question: String,
    pub choices: Vec<String>,
    pub queries: Vec<String>,
    pub sentences: Vec<TracedSentence>,
    /// Selected sentence indices in document order.
    pub selected: Vec<usize>,
    pub truncations: Vec<Truncation>,
    pub real_token_count: usize,
    pub members: Vec<MemberOutput>,
    pub probabilities: Vec<f64>,
    pub predicted: usize,
    pub correct_index: Option<usize>,
    pub is_correct: Option<bool>,
    pub gold_alignment: Option<Vec<usize>>,
    /// Gold sentences the selector did not pick.
    pub missed_gold: Vec<usize>,
}

pub fn trace(qid: &str, ds: &Dataset, pipeline: &Pipeline) -> Result<TraceReport> {
    let item = ds.item(qid)?;
    let doc = ds.document_of(item);
    let vocab = Vocabulary::from_dataset(ds);
    let ItemOutcome {
        selection,
        context,
        members,
        distribution,
        predicted,
        ..
    } = pipeline.run_item(doc, item, &vocab)?;

    let gold = item.gold_alignment.clone().unwrap_or_default();
    let sentences = doc
        .sentences()
        .iter()
        .zip(&selection.combined)
        .map(|(s, scored)| TracedSentence {
            index: s.index(),
            text: s.text().to_string(),
            score: scored.score,
            selected: context.contains_sentence(s.index()),
            gold: gold.contains(&s.index()),
        })
        .collect();
    let missed_gold = gold
        .iter()
        .copied()
        .filter(|&g| !context.contains_sentence(g))
        .collect();

    Ok(TraceReport {
        qid: item.qid.clone(),
        doc_id: doc.doc_id.clone(),
        question: item.question.clone(),
        choices: item.choices.clone(),
        queries: selection.queries.into_iter().map(|q| q.text).collect(),
        sentences,
        selected: context.sentence_indices(),
        truncations: context.truncations,
        real_token_count: context.real_token_count,
        members,
        probabilities: distribution.probabilities,
        predicted,
        correct_index: item.correct_index,
        is_correct: item.correct_index.map(|c| c == predicted),
        gold_alignment: item.gold_alignment.clone(),
        missed_gold,
    })
}

impl fmt::Display for TraceReport {
    /// Plot listing with `*` on selected sentences and `G` on gold ones,
    /// followed by the choice table.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qid: {}  (document {})", self.qid, self.doc_id)?;
        writeln!(f, "question: {}", self.question)?;
        for q in &self.queries {
            writeln!(f, "query: {q}")?;
        }
        writeln!(f)?;
        writeln!(f, "sentences (* selected, G gold):")?;
        for s in &self.sentences {
            writeln!(
                f,
                "  {}{} [{:>3}] {:.4}  {}",
                if s.selected { '*' } else { ' ' },
                if s.gold { 'G' } else { ' ' },
                s.index,
                s.score,
                s.text
            )?;
        }
        writeln!(f)?;
        writeln!(f, "tokens used: {}", self.real_token_count)?;
        for t in &self.truncations {
            writeln!(
                f,
                "  truncated sentence {}: {} -> {} tokens",
                t.sentence_index, t.original_tokens, t.kept_tokens
            )?;
        }
        if !self.missed_gold.is_empty() {
            writeln!(f, "missed gold sentences: {:?}", self.missed_gold)?;
        }
        writeln!(f)?;
        for (i, c) in self.choices.iter().enumerate() {
            let mut marks = String::new();
            if i == self.predicted {
                marks.push_str(" <= predicted");
            }
            if self.correct_index == Some(i) {
                marks.push_str(" (correct)");
            }
            let logits: Vec<String> = self
                .members
                .iter()
                .map(|m| format!("{}={:.4}", m.reader_id, m.logits[i]))
                .collect();
            writeln!(
                f,
                "  [{i}] p={:.4} {}  {c}{marks}",
                self.probabilities[i],
                logits.join(" ")
            )?;
        }
        match self.is_correct {
            Some(true) => writeln!(f, "verdict: correct"),
            Some(false) => writeln!(f, "verdict: wrong"),
            None => writeln!(f, "verdict: unlabeled"),
        }
    }
}
