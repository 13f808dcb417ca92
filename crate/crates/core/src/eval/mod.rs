//! Running the pipeline over a dataset: accuracy, selection recall,
//! per-question traces and report files.

mod pipeline;
mod report;
mod trace;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, QAItem, Split};
use crate::error::{Error, Result};
use crate::selector::Vocabulary;

pub use pipeline::{ItemOutcome, MemberOutput, Pipeline, PipelineConfig, Selection, Selector};
pub use report::{emit_report, markdown_table, write_predictions, Prediction, ReportFormat};
pub use trace::{trace, TraceReport, TracedSentence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub qid: String,
    pub predicted: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_correct: Option<bool>,
    pub selected_indices: Vec<usize>,
    /// Whether the selection covers the whole gold alignment, when one exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_covered: Option<bool>,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub split: Split,
    pub model: String,
    /// Labeled items; the accuracy denominator.
    pub num_items: usize,
    pub num_correct: usize,
    pub accuracy: Option<f64>,
    pub num_unlabeled: usize,
    pub selection_recall: Option<f64>,
    /// Effective configuration that produced this report.
    pub config: PipelineConfig,
    /// Sorted by qid.
    pub per_item: Vec<ItemResult>,
}

/// True when `selected` contains every index of `gold`.
pub fn covers(selected: &[usize], gold: &[usize]) -> bool {
    gold.iter().all(|g| selected.contains(g))
}

fn run_all<T, F>(ds: &Dataset, jobs: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&QAItem) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs:?} workers: {e}")))?;
    pool.install(|| ds.items().par_iter().map(&f).collect())
}

/// Runs every item of `ds` through `pipeline` on at most `jobs` workers
/// (all cores when `None`). The result does not depend on `jobs`.
pub fn evaluate(ds: &Dataset, pipeline: &Pipeline, jobs: Option<usize>) -> Result<EvalReport> {
    let vocab = Vocabulary::from_dataset(ds);
    let outcomes = run_all(ds, jobs, |item| {
        pipeline.run_item(ds.document_of(item), item, &vocab)
    })?;

    let mut per_item: Vec<ItemResult> = ds
        .items()
        .iter()
        .zip(outcomes)
        .map(|(item, out)| {
            let selected_indices = out.context.sentence_indices();
            ItemResult {
                qid: item.qid.clone(),
                predicted: out.predicted,
                correct_index: item.correct_index,
                is_correct: item.correct_index.map(|c| c == out.predicted),
                gold_covered: item
                    .gold_alignment
                    .as_ref()
                    .map(|g| covers(&selected_indices, g)),
                selected_indices,
                probabilities: out.distribution.probabilities,
            }
        })
        .collect();
    per_item.sort_by(|a, b| a.qid.cmp(&b.qid));

    let num_items = per_item.iter().filter(|r| r.is_correct.is_some()).count();
    let num_correct = per_item.iter().filter(|r| r.is_correct == Some(true)).count();
    let aligned: Vec<bool> = per_item.iter().filter_map(|r| r.gold_covered).collect();
    Ok(EvalReport {
        split: ds.split,
        model: pipeline.config().model_label(),
        num_items,
        num_correct,
        accuracy: (num_items > 0).then(|| num_correct as f64 / num_items as f64),
        num_unlabeled: per_item.len() - num_items,
        selection_recall: (!aligned.is_empty())
            .then(|| aligned.iter().filter(|&&c| c).count() as f64 / aligned.len() as f64),
        config: pipeline.config().clone(),
        per_item,
    })
}

/// Fraction of gold-aligned items whose selected sentences contain the full
/// alignment.
pub fn selection_recall(ds: &Dataset, selector: &Selector) -> Result<f64> {
    let mut aligned = 0usize;
    let mut covered = 0usize;
    for item in ds.items() {
        let Some(gold) = &item.gold_alignment else {
            continue;
        };
        let selection = selector.select(ds.document_of(item), item)?;
        let indices: Vec<usize> = selection.selected.iter().map(|s| s.sentence_index).collect();
        aligned += 1;
        if covers(&indices, gold) {
            covered += 1;
        }
    }
    if aligned == 0 {
        return Err(Error::NoAlignedItems);
    }
    Ok(covered as f64 / aligned as f64)
}
