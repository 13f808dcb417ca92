use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{word_count, Dataset, Split};

/// Table-1 style description of a split. Averages are `None` when there is
/// nothing to average over (no items, or no labeled items for answer lengths).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub split: Split,
    pub num_movies: usize,
    pub num_questions: usize,
    pub avg_question_words: Option<f64>,
    pub avg_correct_answer_words: Option<f64>,
    pub avg_wrong_answer_words: Option<f64>,
    pub avg_sentences_per_plot: Option<f64>,
    pub avg_words_per_sentence: Option<f64>,
}

#[derive(Default)]
struct Mean {
    sum: usize,
    n: usize,
}

impl Mean {
    fn push(&mut self, v: usize) {
        self.sum += v;
        self.n += 1;
    }

    fn get(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum as f64 / self.n as f64)
    }
}

/// Statistics over the items of `ds` and the documents they reference.
pub fn dataset_stats(ds: &Dataset) -> StatsReport {
    let mut question = Mean::default();
    let mut correct = Mean::default();
    let mut wrong = Mean::default();
    for item in ds.items() {
        question.push(word_count(&item.question));
        if let Some(ci) = item.correct_index {
            for (i, choice) in item.choices.iter().enumerate() {
                if i == ci {
                    correct.push(word_count(choice));
                } else {
                    wrong.push(word_count(choice));
                }
            }
        }
    }

    let referenced: BTreeSet<&str> = ds.items().iter().map(|i| i.doc_id.as_str()).collect();
    let mut sentences_per_plot = Mean::default();
    let mut words_per_sentence = Mean::default();
    for doc_id in &referenced {
        let doc = ds.document(doc_id).expect("validated dataset");
        sentences_per_plot.push(doc.len());
        for s in doc.sentences() {
            words_per_sentence.push(s.len_tokens());
        }
    }

    StatsReport {
        split: ds.split,
        num_movies: referenced.len(),
        num_questions: ds.items().len(),
        avg_question_words: question.get(),
        avg_correct_answer_words: correct.get(),
        avg_wrong_answer_words: wrong.get(),
        avg_sentences_per_plot: sentences_per_plot.get(),
        avg_words_per_sentence: words_per_sentence.get(),
    }
}

impl StatsReport {
    fn rows(&self) -> [(&'static str, String); 7] {
        let avg = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.1}"));
        [
            ("# of Movies", self.num_movies.to_string()),
            ("# of Questions", self.num_questions.to_string()),
            ("Avg. Q. # of words", avg(self.avg_question_words)),
            ("Avg. CA. # of words", avg(self.avg_correct_answer_words)),
            ("Avg. WA. # of words", avg(self.avg_wrong_answer_words)),
            ("Avg. sentences per plot", avg(self.avg_sentences_per_plot)),
            ("Avg. words per sentence", avg(self.avg_words_per_sentence)),
        ]
    }

    /// Renders one or more reports side by side, one column per split.
    pub fn table(reports: &[StatsReport]) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<26}", "");
        for r in reports {
            let _ = write!(out, "{:>10}", r.split.as_str());
        }
        out.push('\n');
        let rows: Vec<_> = reports.iter().map(StatsReport::rows).collect();
        for line in 0..7 {
            let label = rows.first().map_or("", |r| r[line].0);
            let _ = write!(out, "{label:<26}");
            for r in &rows {
                let _ = write!(out, "{:>10}", r[line].1);
            }
            out.push('\n');
        }
        out
    }
}
