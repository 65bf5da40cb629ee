use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BinarySvmModel, SvmError};

/// A pairwise classifier plus the candidate its positive sign stands for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseModel {
    pub model: BinarySvmModel,
    /// Candidate index voted for when the decision value is non-negative.
    pub positive: usize,
}

/// Result of a max-wins vote.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteOutcome {
    /// Winning candidate (an index into the caller's class enumeration).
    pub winner: usize,
    /// Votes per candidate, in candidate order.
    pub tally: Vec<(usize, u32)>,
}

/// Max-wins voting over the candidate classes. `models` maps unordered
/// pairs (keyed low-high) to oriented classifiers. Ties on the vote count
/// fall back to the caller-supplied per-class `scores`, then to candidate
/// order.
pub fn pairwise_vote(
    models: &BTreeMap<(usize, usize), PairwiseModel>,
    candidates: &[usize],
    scores: &[f64],
    x: &[f64],
) -> Result<VoteOutcome, SvmError> {
    if candidates.is_empty() {
        return Err(SvmError::NoCandidates);
    }
    debug_assert_eq!(candidates.len(), scores.len());
    let mut tally: Vec<(usize, u32)> = candidates.iter().map(|c| (*c, 0)).collect();
    for i in 0..candidates.len() {
        for j in (i + 1)..candidates.len() {
            let (a, b) = (candidates[i], candidates[j]);
            let key = if a < b { (a, b) } else { (b, a) };
            let entry = models
                .get(&key)
                .ok_or(SvmError::MissingPairwiseModel { a: key.0, b: key.1 })?;
            let f = entry.model.decision_value(x)?;
            let vote_for = if f >= 0.0 {
                entry.positive
            } else if entry.positive == key.0 {
                key.1
            } else {
                key.0
            };
            let slot = if vote_for == a { i } else { j };
            tally[slot].1 += 1;
        }
    }
    let mut winner = 0usize;
    for idx in 1..tally.len() {
        let better_votes = tally[idx].1 > tally[winner].1;
        let tie = tally[idx].1 == tally[winner].1;
        if better_votes || (tie && scores[idx] > scores[winner]) {
            winner = idx;
        }
    }
    Ok(VoteOutcome {
        winner: candidates[winner],
        tally,
    })
}
