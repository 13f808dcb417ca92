//! Seeded generator for planted-evidence corpora.
//!
//! Every question gets a two-sentence gold span: the first sentence repeats
//! the question's entity and verb together with the answer words, the second
//! repeats entity and verb among filler. Distractor choices use words found nowhere else,
//! so a lexical pipeline that selects the gold span answers correctly.
//!
//! In the adversarial variant the answer-bearing sentence is paraphrased
//! with fresh words, and four decoy sentences repeat the question's entity
//! and verb alongside one distractor's words. The selector then keeps the
//! decoys and the weaker gold sentence but misses the one that answers.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, Document, QAItem, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlantedConfig {
    pub documents: usize,
    pub questions_per_document: usize,
    pub sentences_per_document: usize,
    pub choices: usize,
    pub adversarial: bool,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            documents: 50,
            questions_per_document: 4,
            sentences_per_document: 30,
            choices: 5,
            adversarial: false,
            seed: 7,
        }
    }
}

/// Content and filler words share no consonants, so their character
/// trigrams barely overlap.
const CONTENT: &[&str] = &[
    "ba", "ke", "ri", "to", "mu", "sa", "bo", "ki", "ru", "te", "mi", "so", "bu", "ka", "re",
    "ti", "mo", "se",
];
const FILLER: &[&str] = &[
    "la", "ve", "ni", "do", "pu", "zo", "ga", "fe", "hi", "ju", "ly", "we", "xi", "yo", "ce",
    "na", "di", "po",
];

struct WordBank {
    rng: ChaCha8Rng,
    used: HashSet<String>,
}

impl WordBank {
    fn fresh(&mut self) -> String {
        self.fresh_from(CONTENT)
    }

    fn fresh_from(&mut self, syllables: &[&str]) -> String {
        loop {
            let n = self.rng.random_range(2..=4);
            let w: String = (0..n)
                .map(|_| syllables[self.rng.random_range(0..syllables.len())])
                .collect();
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn fresh_n(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.fresh()).collect()
    }
}

fn capitalize(words: &[String]) -> String {
    let mut s = words.join(" ");
    if let Some(first) = s.get(0..1) {
        let upper = first.to_uppercase();
        s.replace_range(0..1, &upper);
    }
    s.push('.');
    s
}

struct Question {
    entity: Vec<String>,
    verb: String,
    answer: Vec<String>,
    distractors: Vec<Vec<String>>,
}

/// Builds the planted corpus. Layout is fully determined by `cfg.seed`.
pub fn planted_dataset(cfg: &PlantedConfig) -> Dataset {
    assert!(cfg.choices >= 2, "at least two choices");
    let slots_per_question = if cfg.adversarial { 6 } else { 2 };
    assert!(
        cfg.questions_per_document * slots_per_question <= cfg.sentences_per_document,
        "document too short for its questions"
    );

    let mut bank = WordBank {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        used: HashSet::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let filler: Vec<String> = (0..400).map(|_| bank.fresh_from(FILLER)).collect();
    let filler_words = |rng: &mut ChaCha8Rng, n: usize| -> Vec<String> {
        (0..n).map(|_| filler[rng.random_range(0..filler.len())].clone()).collect()
    };

    let mut documents = Vec::with_capacity(cfg.documents);
    let mut items = Vec::new();
    for d in 0..cfg.documents {
        let doc_id = format!("doc{d:03}");
        let mut sentences: Vec<Option<String>> = vec![None; cfg.sentences_per_document];

        for qn in 0..cfg.questions_per_document {
            let q = Question {
                entity: bank.fresh_n(2),
                verb: bank.fresh(),
                answer: bank.fresh_n(3),
                distractors: (1..cfg.choices).map(|_| bank.fresh_n(3)).collect(),
            };

            let free_pairs: Vec<usize> = (0..cfg.sentences_per_document - 1)
                .filter(|&i| sentences[i].is_none() && sentences[i + 1].is_none())
                .collect();
            let g = free_pairs[rng.random_range(0..free_pairs.len())];

            let mut second = q.entity.clone();
            second.push(q.verb.clone());
            second.extend(filler_words(&mut rng, 10));
            sentences[g + 1] = Some(capitalize(&second));

            let correct = rng.random_range(0..cfg.choices);
            let mut choices: Vec<String> = q.distractors.iter().map(|w| w.join(" ")).collect();
            choices.insert(correct, q.answer.join(" "));

            if cfg.adversarial {
                let mut para = bank.fresh_n(3);
                para.extend(filler_words(&mut rng, 8));
                para.extend(bank.fresh_n(3));
                sentences[g] = Some(capitalize(&para));

                let lure = rng.random_range(0..q.distractors.len());
                let mut free: Vec<usize> = (0..cfg.sentences_per_document)
                    .filter(|&i| sentences[i].is_none())
                    .collect();
                free.shuffle(&mut rng);
                for &slot in free.iter().take(4) {
                    let mut decoy = q.entity.clone();
                    decoy.push(q.verb.clone());
                    decoy.extend(filler_words(&mut rng, 6));
                    decoy.extend(q.distractors[lure].iter().cloned());
                    sentences[slot] = Some(capitalize(&decoy));
                }
            } else {
                let mut gold = q.entity.clone();
                gold.push(q.verb.clone());
                gold.extend(filler_words(&mut rng, 8));
                gold.extend(q.answer.iter().cloned());
                sentences[g] = Some(capitalize(&gold));
            }

            items.push(QAItem {
                qid: format!("{doc_id}:{qn:02}"),
                doc_id: doc_id.clone(),
                question: format!("What did {} {}?", q.entity.join(" "), q.verb),
                choices,
                correct_index: Some(correct),
                gold_alignment: Some(vec![g, g + 1]),
            });
        }

        let texts: Vec<String> = sentences
            .into_iter()
            .map(|s| {
                s.unwrap_or_else(|| {
                    let n = rng.random_range(12..=24);
                    capitalize(&filler_words(&mut rng, n))
                })
            })
            .collect();
        documents.push(Document::new(doc_id.clone(), format!("Plot {d}"), texts).expect("non-empty sentences"));
    }
    Dataset::new(Split::Val, documents, items).expect("generated dataset is valid")
}
