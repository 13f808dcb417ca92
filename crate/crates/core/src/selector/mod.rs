//! Query construction, top-k sentence selection and the token budget.

mod budget;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::QAItem;
use crate::error::{Error, Result};

pub use budget::{
    enforce_token_budget, token_ids_of, write_contexts, BudgetConfig, ContextRecord,
    SelectedContext, Truncation, Vocabulary, PAD_ID, UNK_ID,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    /// Question followed by every choice, scored once.
    #[default]
    ConcatAll,
    /// One query per choice; a sentence keeps its best score across them.
    PerAnswer,
}

impl FromStr for QueryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concat_all" => Ok(QueryMode::ConcatAll),
            "per_answer" => Ok(QueryMode::PerAnswer),
            other => Err(Error::Config(format!(
                "unknown query mode {other:?} (expected concat_all or per_answer)"
            ))),
        }
    }
}

impl fmt::Display for QueryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryMode::ConcatAll => "concat_all",
            QueryMode::PerAnswer => "per_answer",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryText {
    pub text: String,
    pub qid: String,
    pub mode: QueryMode,
}

pub fn build_query(item: &QAItem, mode: QueryMode) -> Vec<QueryText> {
    let make = |text: String| QueryText {
        text,
        qid: item.qid.clone(),
        mode,
    };
    match mode {
        QueryMode::ConcatAll => {
            let mut text = item.question.clone();
            for c in &item.choices {
                text.push(' ');
                text.push_str(c);
            }
            vec![make(text)]
        }
        QueryMode::PerAnswer => item
            .choices
            .iter()
            .map(|c| make(format!("{} {}", item.question, c)))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredSentence {
    pub sentence_index: usize,
    pub score: f64,
}

/// Descending score, then ascending index: the selection priority order.
pub(crate) fn by_priority(a: &ScoredSentence, b: &ScoredSentence) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.sentence_index.cmp(&b.sentence_index))
}

/// The `k` best sentences (ties to the smaller index), in document order.
pub fn select_top_k(scored: &[ScoredSentence], k: usize) -> Vec<ScoredSentence> {
    let mut picked: Vec<ScoredSentence> = scored.to_vec();
    if picked.len() > k {
        picked.select_nth_unstable_by(k, by_priority);
        picked.truncate(k);
    }
    picked.sort_by_key(|s| s.sentence_index);
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scored(scores: &[f64]) -> Vec<ScoredSentence> {
        scores
            .iter()
            .enumerate()
            .map(|(sentence_index, &score)| ScoredSentence {
                sentence_index,
                score,
            })
            .collect()
    }

    fn indices(s: &[ScoredSentence]) -> Vec<usize> {
        s.iter().map(|s| s.sentence_index).collect()
    }

    fn item(choices: &[&str]) -> QAItem {
        QAItem {
            qid: "q".into(),
            doc_id: "d".into(),
            question: "Who ran?".into(),
            choices: choices.iter().map(|c| c.to_string()).collect(),
            correct_index: None,
            gold_alignment: None,
        }
    }

    #[test]
    fn concat_query() {
        let q = build_query(&item(&["A", "B", "C", "D", "E"]), QueryMode::ConcatAll);
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].text, "Who ran? A B C D E");
        assert_eq!(q[0].qid, "q");
    }

    #[test]
    fn per_answer_queries() {
        let q = build_query(&item(&["A", "B", "C", "D", "E"]), QueryMode::PerAnswer);
        assert_eq!(q.len(), 5);
        assert_eq!(q[0].text, "Who ran? A");
        assert_eq!(q[4].text, "Who ran? E");
    }

    #[test]
    fn single_choice_query() {
        assert_eq!(build_query(&item(&["A"]), QueryMode::ConcatAll)[0].text, "Who ran? A");
    }

    #[test]
    fn top_k_examples() {
        let s = scored(&[0.1, 0.9, 0.5, 0.7, 0.2, 0.6]);
        assert_eq!(indices(&select_top_k(&s, 5)), vec![1, 2, 3, 4, 5]);
        assert_eq!(indices(&select_top_k(&scored(&[0.3, 0.2, 0.1]), 5)), vec![0, 1, 2]);
        assert_eq!(indices(&select_top_k(&scored(&[0.5, 0.5, 0.5]), 2)), vec![0, 1]);
    }

    proptest! {
        #[test]
        fn top_k_output_is_strictly_increasing(
            scores in prop::collection::vec(0.0f64..1.0, 1..40),
            k in 1usize..12,
        ) {
            let out = select_top_k(&scored(&scores), k);
            prop_assert_eq!(out.len(), k.min(scores.len()));
            prop_assert!(out.windows(2).all(|w| w[0].sentence_index < w[1].sentence_index));
        }

        #[test]
        fn k_at_least_len_selects_everything(scores in prop::collection::vec(0.0f64..1.0, 1..20)) {
            let out = select_top_k(&scored(&scores), scores.len());
            prop_assert_eq!(indices(&out), (0..scores.len()).collect::<Vec<_>>());
        }
    }
}
