use serde::{Deserialize, Serialize};

use crate::text;

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentenceStats {
    /// Mean sentences per document.
    pub avg_sentences: f64,
    /// Mean whitespace-delimited words per sentence, pooled over all sentences.
    pub avg_sentence_len: f64,
    pub documents: usize,
    pub sentences: usize,
    pub words: usize,
}

/// Sentence count and length over a document list. Documents without any
/// sentence are skipped with a warning.
pub fn sentence_stats<S: AsRef<str>>(documents: &[S]) -> Result<SentenceStats, StatsError> {
    if documents.is_empty() {
        return Err(StatsError::Empty);
    }
    let (mut docs, mut sentences, mut words) = (0usize, 0usize, 0usize);
    for (i, d) in documents.iter().enumerate() {
        let sents = text::split_sentences(d.as_ref());
        if sents.is_empty() {
            tracing::warn!(document = i, "document has no sentences, excluded");
            continue;
        }
        docs += 1;
        sentences += sents.len();
        words += sents.iter().map(|s| text::words(s).len()).sum::<usize>();
    }
    if docs == 0 {
        return Err(StatsError::NoSentences);
    }
    Ok(SentenceStats {
        avg_sentences: sentences as f64 / docs as f64,
        avg_sentence_len: words as f64 / sentences as f64,
        documents: docs,
        sentences,
        words,
    })
}
