use std::collections::{BTreeMap, BTreeSet};

use super::{Reader, ReaderInput};
use crate::corpus::token_surfaces;
use crate::error::Result;
use crate::similarity::IdfTable;

pub const LEXICAL_ID: &str = "lexical";

/// Baseline reader: a choice scores the IDF-weighted overlap between its
/// tokens and the tokens of the selected context plus the question.
///
/// For each distinct choice token `t` that occurs `tf` times in context and
/// question, the logit gains `(1 + ln tf) · idf(t)`; the sum is divided by
/// `sqrt(#distinct choice tokens)` so long choices gain no free advantage.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalReader;

impl Reader for LexicalReader {
    fn reader_id(&self) -> &str {
        LEXICAL_ID
    }

    fn score_choices(&self, input: &ReaderInput<'_>) -> Result<Vec<f64>> {
        let idf = IdfTable::from_document(input.doc);
        let mut evidence: BTreeMap<String, usize> = BTreeMap::new();
        let question_tokens = token_surfaces(input.question);
        for t in input.context.tokens().map(str::to_string).chain(question_tokens) {
            *evidence.entry(t).or_insert(0) += 1;
        }

        Ok(input
            .choices
            .iter()
            .map(|choice| {
                let distinct: BTreeSet<String> = token_surfaces(choice).into_iter().collect();
                if distinct.is_empty() {
                    return 0.0;
                }
                let overlap: f64 = distinct
                    .iter()
                    .filter_map(|t| evidence.get(t).map(|&tf| (1.0 + (tf as f64).ln()) * idf.idf(t)))
                    .fold(0.0, |a, b| a + b);
                overlap / (distinct.len() as f64).sqrt()
            })
            .collect())
    }
}
