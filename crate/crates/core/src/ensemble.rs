//! Combining several readers' distributions for the same question.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reader::{predict, ChoiceDistribution};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleRule {
    /// Each member votes for its argmax; vote ties go to the larger summed
    /// probability, then to the lower index.
    #[default]
    Majority,
    /// Weighted mean of the members' distributions.
    MeanProbability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub members: Vec<String>,
    /// One positive weight per member; omitted means all ones.
    #[serde(default)]
    pub weights: Vec<f64>,
    #[serde(default)]
    pub rule: EnsembleRule,
}

impl EnsembleConfig {
    pub fn weights(&self) -> Vec<f64> {
        if self.weights.is_empty() {
            vec![1.0; self.members.len()]
        } else {
            self.weights.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::Config("ensemble needs at least one member".into()));
        }
        let weights = self.weights();
        if weights.len() != self.members.len() {
            return Err(Error::Config(format!(
                "ensemble has {} members but {} weights",
                self.members.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Config("ensemble weights must be positive".into()));
        }
        Ok(())
    }
}

fn check_compatible(dists: &[ChoiceDistribution]) -> Result<usize> {
    let first = dists
        .first()
        .ok_or_else(|| Error::LengthMismatch("no member distributions".into()))?;
    for d in &dists[1..] {
        if d.len() != first.len() {
            return Err(Error::LengthMismatch(format!(
                "member {} has {} choices, member {} has {}",
                first.reader_id,
                first.len(),
                d.reader_id,
                d.len()
            )));
        }
        if d.qid != first.qid {
            return Err(Error::LengthMismatch(format!(
                "distributions for different questions: {} vs {}",
                first.qid, d.qid
            )));
        }
    }
    Ok(first.len())
}

pub const ENSEMBLE_ID: &str = "ensemble";

/// Weighted mean per choice, renormalized to sum to one.
pub fn aggregate_probabilities(
    dists: &[ChoiceDistribution],
    weights: &[f64],
) -> Result<ChoiceDistribution> {
    let n = check_compatible(dists)?;
    if weights.len() != dists.len() {
        return Err(Error::LengthMismatch(format!(
            "{} weights for {} distributions",
            weights.len(),
            dists.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidInput("ensemble weights must be positive".into()));
    }
    let mut mean = vec![0.0; n];
    for (d, w) in dists.iter().zip(weights) {
        for (m, p) in mean.iter_mut().zip(&d.probabilities) {
            *m += w * p;
        }
    }
    let total: f64 = mean.iter().sum();
    for m in &mut mean {
        *m /= total;
    }
    let reader_id = if dists.len() == 1 {
        dists[0].reader_id.clone()
    } else {
        ENSEMBLE_ID.to_string()
    };
    ChoiceDistribution::new(dists[0].qid.clone(), reader_id, mean)
}

pub fn majority_vote(dists: &[ChoiceDistribution]) -> Result<usize> {
    let n = check_compatible(dists)?;
    let mut votes = vec![0usize; n];
    let mut mass = vec![0.0f64; n];
    for d in dists {
        votes[predict(d)] += 1;
        for (m, p) in mass.iter_mut().zip(&d.probabilities) {
            *m += p;
        }
    }
    let mut best = 0;
    for c in 1..n {
        if votes[c] > votes[best] || (votes[c] == votes[best] && mass[c] > mass[best]) {
            best = c;
        }
    }
    Ok(best)
}

/// Final choice and reported distribution under `rule`.
pub fn decide(
    dists: &[ChoiceDistribution],
    weights: &[f64],
    rule: EnsembleRule,
) -> Result<(usize, ChoiceDistribution)> {
    let combined = aggregate_probabilities(dists, weights)?;
    let choice = match rule {
        EnsembleRule::Majority => majority_vote(dists)?,
        EnsembleRule::MeanProbability => predict(&combined),
    };
    Ok((choice, combined))
}
