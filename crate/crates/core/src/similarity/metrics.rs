//! Pairwise similarity metrics and per-model score normalization.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::EmbeddingVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub value: f64,
    pub metric_id: String,
}

impl SimilarityScore {
    fn new(value: f64, metric_id: &str) -> Self {
        Self {
            value,
            metric_id: metric_id.to_string(),
        }
    }
}

/// `Σ aᵢbᵢ / (‖a‖‖b‖)`.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<SimilarityScore> {
    if a.values.len() != b.values.len() {
        return Err(Error::DimensionMismatch {
            expected: a.values.len(),
            actual: b.values.len(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.values.iter().zip(&b.values) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    for (v, norm) in [(a, na), (b, nb)] {
        if norm == 0.0 {
            return Err(Error::ZeroVector {
                provider_id: v.provider_id.clone(),
            });
        }
    }
    let value = (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0);
    Ok(SimilarityScore::new(value, "cosine"))
}

/// Character-level edit distance (insert, delete, substitute at unit cost).
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if ca == cb {
                diag
            } else {
                1 + diag.min(above).min(row[j])
            };
            diag = above;
        }
    }
    row[b.len()]
}

/// `1 − distance / max(len₁, len₂)` over characters; two empty strings score 1.
pub fn levenshtein_similarity(s1: &str, s2: &str) -> SimilarityScore {
    let longest = s1.chars().count().max(s2.chars().count());
    let value = if longest == 0 {
        1.0
    } else {
        1.0 - edit_distance(s1, s2) as f64 / longest as f64
    };
    SimilarityScore::new(value, "levenshtein")
}

fn qgram_profile(s: &str, q: usize) -> (HashMap<&str, usize>, usize) {
    let bounds: Vec<usize> = s
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(s.len()))
        .collect();
    let mut profile = HashMap::new();
    let mut total = 0;
    for w in bounds.windows(q + 1) {
        *profile.entry(&s[w[0]..w[q]]).or_insert(0) += 1;
        total += 1;
    }
    (profile, total)
}

/// `1 − Σ_g |c₁(g) − c₂(g)| / (|grams₁| + |grams₂|)`; both profiles empty scores 1.
pub fn qgram_similarity(s1: &str, s2: &str, q: usize) -> Result<SimilarityScore> {
    if q == 0 {
        return Err(Error::InvalidInput("q-gram length must be at least 1".into()));
    }
    let (p1, n1) = qgram_profile(s1, q);
    let (p2, n2) = qgram_profile(s2, q);
    if n1 + n2 == 0 {
        return Ok(SimilarityScore::new(1.0, "qgram"));
    }
    let mut distance = 0usize;
    for (g, &c1) in &p1 {
        distance += c1.abs_diff(p2.get(g).copied().unwrap_or(0));
    }
    for (g, &c2) in &p2 {
        if !p1.contains_key(g) {
            distance += c2;
        }
    }
    Ok(SimilarityScore::new(
        1.0 - distance as f64 / (n1 + n2) as f64,
        "qgram",
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub values: Vec<f64>,
    /// Set when every score collapsed to zero and a uniform vector was returned.
    pub degenerate: bool,
}

/// Sum-to-one normalization, shifting by `-min` first if any score is negative.
pub fn normalize_scores(scores: &[f64]) -> Result<Normalized> {
    if scores.is_empty() {
        return Err(Error::InvalidInput("cannot normalize an empty score list".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("scores must be finite".into()));
    }
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = if min < 0.0 { -min } else { 0.0 };
    let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
    let sum: f64 = shifted.iter().sum();
    if sum <= 0.0 {
        let u = 1.0 / scores.len() as f64;
        return Ok(Normalized {
            values: vec![u; scores.len()],
            degenerate: true,
        });
    }
    Ok(Normalized {
        values: shifted.into_iter().map(|s| s / sum).collect(),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(values: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new("test", values.to_vec()).unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_similarity(&v(&[1., 0.]), &v(&[1., 0.])).unwrap().value, 1.0);
        assert_eq!(cosine_similarity(&v(&[1., 0.]), &v(&[0., 1.])).unwrap().value, 0.0);
        let c = cosine_similarity(&v(&[1., 2., 2.]), &v(&[2., 1., 2.])).unwrap();
        assert!((c.value - 8.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_errors() {
        assert!(matches!(
            cosine_similarity(&v(&[1., 0.]), &v(&[1., 0., 0.])),
            Err(Error::DimensionMismatch { expected: 2, actual: 3 })
        ));
        assert!(matches!(
            cosine_similarity(&v(&[0., 0.]), &v(&[1., 0.])),
            Err(Error::ZeroVector { .. })
        ));
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein_similarity("abc", "abc").value, 1.0);
        assert_eq!(levenshtein_similarity("", "abc").value, 0.0);
        assert_eq!(levenshtein_similarity("", "").value, 1.0);
        assert_eq!(edit_distance("kitten", "sitting"), 3);
        let s = levenshtein_similarity("kitten", "sitting").value;
        assert!((s - (1.0 - 3.0 / 7.0)).abs() < 1e-12);
    }

    #[test]
    fn levenshtein_counts_characters_not_bytes() {
        assert_eq!(edit_distance("café", "cafe"), 1);
        assert!((levenshtein_similarity("café", "cafe").value - 0.75).abs() < 1e-12);
    }

    #[test]
    fn qgram_examples() {
        assert_eq!(qgram_similarity("abcd", "abcd", 2).unwrap().value, 1.0);
        assert_eq!(qgram_similarity("abcd", "wxyz", 2).unwrap().value, 0.0);
        assert_eq!(qgram_similarity("abc", "abd", 2).unwrap().value, 0.5);
        assert_eq!(qgram_similarity("a", "b", 3).unwrap().value, 1.0);
        assert_eq!(qgram_similarity("", "abc", 3).unwrap().value, 0.0);
        assert!(qgram_similarity("a", "b", 0).is_err());
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_scores(&[2., 2.]).unwrap().values, vec![0.5, 0.5]);
        assert_eq!(normalize_scores(&[1., 3.]).unwrap().values, vec![0.25, 0.75]);
        let n = normalize_scores(&[-1., 0., 1.]).unwrap().values;
        for (got, want) in n.iter().zip([0.0, 1.0 / 3.0, 2.0 / 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_degenerate_and_errors() {
        let n = normalize_scores(&[0., 0., 0., 0.]).unwrap();
        assert!(n.degenerate);
        assert_eq!(n.values, vec![0.25; 4]);
        let n = normalize_scores(&[-2., -2.]).unwrap();
        assert!(n.degenerate);
        assert!(normalize_scores(&[]).is_err());
        assert!(normalize_scores(&[1.0, f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn metrics_are_symmetric(a in "[a-c ]{0,12}", b in "[a-c ]{0,12}", q in 1usize..4) {
            prop_assert_eq!(levenshtein_similarity(&a, &b).value, levenshtein_similarity(&b, &a).value);
            prop_assert_eq!(
                qgram_similarity(&a, &b, q).unwrap().value,
                qgram_similarity(&b, &a, q).unwrap().value
            );
            let l = levenshtein_similarity(&a, &b).value;
            prop_assert!((0.0..=1.0).contains(&l));
        }

        #[test]
        fn self_similarity_is_one(s in "\\PC{1,20}", q in 1usize..5) {
            prop_assert_eq!(levenshtein_similarity(&s, &s).value, 1.0);
            prop_assert_eq!(qgram_similarity(&s, &s, q).unwrap().value, 1.0);
        }

        #[test]
        fn normalization_sums_to_one_and_keeps_order(scores in prop::collection::vec(0.0f64..10.0, 1..30)) {
            let n = normalize_scores(&scores).unwrap().values;
            prop_assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for i in 0..scores.len() {
                prop_assert!(n[i] >= 0.0);
                for j in 0..scores.len() {
                    if scores[i] <= scores[j] {
                        prop_assert!(n[i] <= n[j]);
                    }
                }
            }
        }

        #[test]
        fn normalization_preserves_argmax_with_negatives(scores in prop::collection::vec(-10.0f64..10.0, 1..30)) {
            let n = normalize_scores(&scores).unwrap().values;
            let argmax = |xs: &[f64]| {
                xs.iter().enumerate().fold(0, |best, (i, &x)| if x > xs[best] { i } else { best })
            };
            prop_assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert_eq!(scores[argmax(&scores)], scores[argmax(&n)]);
        }
    }
}
