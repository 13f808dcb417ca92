//! Retrieval-gated multiple-choice question answering.
//!
//! A question over a long document is answered in four steps:
//!
//! 1. build a query from the question and its choices ([`selector::build_query`]);
//! 2. score every document sentence against it with one or more similarity
//!    models, normalized and combined ([`similarity::score_sentences`]);
//! 3. keep the top-k sentences in document order and fit them into a fixed
//!    token budget ([`selector::select_top_k`], [`selector::enforce_token_budget`]);
//! 4. let one reader, or an ensemble of readers, turn that context into a
//!    distribution over the choices ([`reader`], [`ensemble`]).
//!
//! [`eval`] runs the whole chain over a [`corpus::Dataset`] and reports
//! accuracy, selection recall and per-question traces.

pub mod config;
pub mod corpus;
pub mod ensemble;
mod error;
pub mod eval;
pub mod reader;
pub mod selector;
pub mod similarity;
pub mod synth;

pub use config::RunConfig;
pub use corpus::{Dataset, Document, QAItem, Sentence, Split};
pub use error::{Error, Result};
pub use eval::{evaluate, selection_recall, trace, EvalReport, Pipeline, PipelineConfig, TraceReport};
pub use reader::{ChoiceDistribution, Reader};
pub use selector::{BudgetConfig, QueryMode, ScoredSentence, SelectedContext};
pub use similarity::{EmbeddingProvider, EmbeddingVector, SimilarityModelConfig};
