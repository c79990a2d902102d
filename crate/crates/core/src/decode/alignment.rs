//! Semantic alignment between token sequences: greedy cosine matching F1.

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("no embedding for token {0:?}")]
    UnknownToken(String),
    #[error("scorer backend failed: {0}")]
    Backend(String),
}

/// Source of pairwise token similarities.
pub trait TokenScorer {
    /// Cosine similarities with rows indexed by `a` and columns by `b`.
    fn similarity_matrix(&self, a: &[String], b: &[String]) -> Result<Vec<Vec<f64>>, ScorerError>;
}

/// One-hot token embeddings: similarity is 1 for equal tokens, 0 otherwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct OneHotScorer;

impl TokenScorer for OneHotScorer {
    fn similarity_matrix(&self, a: &[String], b: &[String]) -> Result<Vec<Vec<f64>>, ScorerError> {
        Ok(a.iter()
            .map(|x| b.iter().map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect())
    }
}

/// Fixed lookup table of token vectors.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTableScorer {
    table: HashMap<String, Vec<f64>>,
}

impl EmbeddingTableScorer {
    pub fn new(table: HashMap<String, Vec<f64>>) -> Self {
        Self { table }
    }

    fn vector(&self, token: &str) -> Result<&[f64], ScorerError> {
        self.table
            .get(token)
            .map(Vec::as_slice)
            .ok_or_else(|| ScorerError::UnknownToken(token.to_string()))
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

impl TokenScorer for EmbeddingTableScorer {
    fn similarity_matrix(&self, a: &[String], b: &[String]) -> Result<Vec<Vec<f64>>, ScorerError> {
        let bv = b.iter().map(|t| self.vector(t)).collect::<Result<Vec<_>, _>>()?;
        a.iter()
            .map(|t| {
                let av = self.vector(t)?;
                Ok(bv.iter().map(|v| cosine(av, v)).collect())
            })
            .collect()
    }
}

/// Greedy-matching precision, recall and F1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Each candidate token is matched to its most similar token in `other`
/// (precision) and vice versa (recall); the result is their harmonic mean.
pub fn greedy_match(
    candidate: &[String],
    other: &[String],
    scorer: &dyn TokenScorer,
) -> Result<MatchScore, ScorerError> {
    match (candidate.is_empty(), other.is_empty()) {
        (true, true) => return Ok(MatchScore { precision: 1.0, recall: 1.0, f1: 1.0 }),
        (true, false) | (false, true) => {
            return Ok(MatchScore { precision: 0.0, recall: 0.0, f1: 0.0 })
        }
        _ => {}
    }
    let sim = scorer.similarity_matrix(candidate, other)?;
    let precision = sim
        .iter()
        .map(|row| row.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / candidate.len() as f64;
    let recall = (0..other.len())
        .map(|j| sim.iter().map(|row| row[j]).fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / other.len() as f64;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(MatchScore { precision, recall, f1 })
}

/// BERTScore-style F1 between two token sequences.
pub fn semantic_alignment(
    candidate: &[String],
    other: &[String],
    scorer: &dyn TokenScorer,
) -> Result<f64, ScorerError> {
    greedy_match(candidate, other, scorer).map(|m| m.f1)
}
