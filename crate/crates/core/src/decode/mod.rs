//! Candidate generation by temperature sampling and crowd selection.

pub mod alignment;
pub mod crowd;
pub mod generate;
pub mod levenshtein;
pub mod sampling;

use thiserror::Error;

pub use alignment::{semantic_alignment, EmbeddingTableScorer, OneHotScorer, ScorerError, TokenScorer};
pub use crowd::{crowd_select, CandidatePool, CrowdSelection};
pub use generate::{generate, DecodeConfig};
pub use levenshtein::{edit_distance, levenshtein_similarity};
pub use sampling::{temperature_probs, temperature_sample};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("invalid decoding configuration: {0}")]
    Config(String),
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("alignment of candidate {candidate} against {other} failed: {source}")]
    Scorer {
        candidate: usize,
        other: usize,
        #[source]
        source: ScorerError,
    },
    #[error(transparent)]
    Tensor(#[from] candle_core::Error),
}
