//! Shared inputs for the benchmarks in `benches/`.

use plotqa_core::synth::{planted_dataset, PlantedConfig};
use plotqa_core::{Dataset, Document, EmbeddingVector};

/// Deterministic pseudo-random vector in `[-1, 1)`.
pub fn vector(dim: usize, seed: u64) -> EmbeddingVector {
    let mut x = seed.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1);
    let values = (0..dim)
        .map(|_| {
            x = x.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
            (x >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect();
    EmbeddingVector::new("bench", values).expect("finite values")
}

pub fn planted(documents: usize) -> Dataset {
    planted_dataset(&PlantedConfig {
        documents,
        ..PlantedConfig::default()
    })
}

/// First document of a planted corpus: 30 sentences of 12 to 24 words.
pub fn document() -> Document {
    planted(1).documents().next().cloned().expect("one document")
}
