//! Crowd selection: pick the candidate that agrees most with the rest of
//! the sampled pool.

use serde::{Deserialize, Serialize};

use super::alignment::{semantic_alignment, TokenScorer};
use super::levenshtein::levenshtein_similarity;
use super::DecodeError;

/// Scores and winner of one crowd selection.
#[derive(Debug, Clone, PartialEq)]
pub struct CrowdSelection {
    pub scores: Vec<f64>,
    pub chosen_index: usize,
}

/// Candidate dump for one source document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePool {
    pub source_id: String,
    pub candidates: Vec<String>,
    pub crowd_scores: Vec<f64>,
    pub chosen_index: usize,
}

impl CandidatePool {
    pub fn chosen(&self) -> &str {
        &self.candidates[self.chosen_index]
    }
}

/// Index of the maximum, first occurrence on ties.
pub fn argmax_first(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        match best {
            Some(b) if *s <= scores[b] => {}
            _ => best = Some(i),
        }
    }
    best
}

/// `score(c_i) = Σ_{j≠i} [semantic(c_i, c_j) + γ · lev(c_i, c_j)]`.
///
/// Self-comparisons are left out: they add the same `1 + γ` to every
/// candidate. A single candidate wins with score 0.
pub fn crowd_select(
    candidates: &[Vec<String>],
    gamma: f64,
    scorer: &dyn TokenScorer,
) -> Result<CrowdSelection, DecodeError> {
    if candidates.is_empty() {
        return Err(DecodeError::EmptyPool);
    }
    let n = candidates.len();
    let mut scores = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let sem = semantic_alignment(&candidates[i], &candidates[j], scorer)
                .map_err(|source| DecodeError::Scorer { candidate: i, other: j, source })?;
            let lev = levenshtein_similarity(&candidates[i], &candidates[j]);
            scores[i] += sem + gamma * lev;
        }
    }
    let chosen_index = argmax_first(&scores).expect("non-empty pool");
    Ok(CrowdSelection { scores, chosen_index })
}
