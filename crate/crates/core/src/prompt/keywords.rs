//! Embedding-ranked keyword extraction over 1–2-gram candidates.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::decode::alignment::cosine;
use crate::text;

/// Maps a document or phrase to a dense vector.
pub trait TextEmbedder {
    fn embed(&self, text: &str) -> Vec<f64>;
}

/// Term-frequency vectors over a fixed vocabulary; out-of-vocabulary words
/// are ignored.
#[derive(Debug, Clone, Default)]
pub struct BagOfWordsEmbedder {
    vocab: BTreeMap<String, usize>,
}

impl BagOfWordsEmbedder {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Self {
        let mut vocab = BTreeMap::new();
        for w in words {
            let w = w.into().to_lowercase();
            let next = vocab.len();
            vocab.entry(w).or_insert(next);
        }
        Self { vocab }
    }

    /// Vocabulary of every word token in `texts`.
    pub fn fit<'a, I: IntoIterator<Item = &'a str>>(texts: I) -> Self {
        Self::new(texts.into_iter().flat_map(text::word_tokens))
    }

    pub fn dim(&self) -> usize {
        self.vocab.len()
    }
}

impl TextEmbedder for BagOfWordsEmbedder {
    fn embed(&self, input: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.vocab.len()];
        for tok in text::word_tokens(input) {
            if let Some(&i) = self.vocab.get(&tok) {
                v[i] += 1.0;
            }
        }
        v
    }
}

/// A ranked keyword; serialized as `[phrase, score]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "(String, f64)", into = "(String, f64)")]
pub struct Keyword {
    pub phrase: String,
    pub score: f64,
}

impl From<(String, f64)> for Keyword {
    fn from((phrase, score): (String, f64)) -> Self {
        Self { phrase, score }
    }
}

impl From<Keyword> for (String, f64) {
    fn from(k: Keyword) -> Self {
        (k.phrase, k.score)
    }
}

fn is_content(token: &str) -> bool {
    token.chars().any(char::is_alphabetic) && !text::is_stop_word(token)
}

/// Distinct unigram and bigram candidates with their first token position.
/// Bigrams must consist of two adjacent content words; punctuation and stop
/// words break adjacency.
pub fn candidate_phrases(document: &str) -> Vec<(String, usize)> {
    let tokens = text::tokenize(document);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        if !is_content(tok) {
            continue;
        }
        if seen.insert(tok.clone()) {
            out.push((tok.clone(), i));
        }
        if let Some(next) = tokens.get(i + 1) {
            if is_content(next) {
                let bigram = format!("{tok} {next}");
                if seen.insert(bigram.clone()) {
                    out.push((bigram, i));
                }
            }
        }
    }
    out
}

/// Top-`count` phrases by cosine similarity to the document embedding,
/// ties going to the phrase that appears first. Scores are clamped to
/// `[0, 1]`.
pub fn extract_keywords(document: &str, embedder: &dyn TextEmbedder, count: usize) -> Vec<Keyword> {
    let candidates = candidate_phrases(document);
    if candidates.is_empty() {
        tracing::warn!("no keyword candidates left after stop-word filtering");
        return Vec::new();
    }
    let doc = embedder.embed(document);
    let mut scored: Vec<(f64, usize, String)> = candidates
        .into_iter()
        .map(|(phrase, pos)| {
            let s = cosine(&doc, &embedder.embed(&phrase)).clamp(0.0, 1.0);
            (s, pos, phrase)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored
        .into_iter()
        .take(count)
        .map(|(score, _, phrase)| Keyword { phrase, score })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_word_document_has_no_keywords() {
        let emb = BagOfWordsEmbedder::fit(["the and of it"]);
        assert!(extract_keywords("The and of it, was.", &emb, 5).is_empty());
    }

    #[test]
    fn dominant_term_ranks_first_on_toy_vocabulary() {
        // vocabulary {polymer, catalyst, chain, film, heat}
        // tf(doc) = (4, 2, 1, 1, 1), |doc| = √23
        // unigram cosines: polymer 4/√23 ≈ .834, catalyst 2/√23 ≈ .417, others 1/√23 ≈ .209
        // bigram "polymer catalyst" = (1,1,0,0,0): 6/(√2·√23) ≈ .885
        // bigram "catalyst polymer": same vector, later position
        // bigram "polymer chain" = (1,0,1,0,0): 5/(√2·√23) ≈ .737
        let emb = BagOfWordsEmbedder::new(["polymer", "catalyst", "chain", "film", "heat"]);
        let doc = "polymer catalyst polymer. chain polymer; film heat polymer catalyst";
        let kws = extract_keywords(doc, &emb, 10);
        let s23 = 23f64.sqrt();
        assert_eq!(kws[0].phrase, "polymer catalyst");
        assert!((kws[0].score - 6.0 / (2f64.sqrt() * s23)).abs() < 1e-12);
        assert_eq!(kws[1].phrase, "catalyst polymer");
        assert_eq!(kws[2].phrase, "polymer");
        assert!((kws[2].score - 4.0 / s23).abs() < 1e-12);
        let unigrams: Vec<&str> = kws.iter().map(|k| k.phrase.as_str()).filter(|p| !p.contains(' ')).collect();
        assert_eq!(unigrams[0], "polymer");
        assert!(kws.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn count_limits_output() {
        let doc = "Ziegler catalysts control polyethylene density. Polypropylene films resist heat.";
        let emb = BagOfWordsEmbedder::fit([doc]);
        for m in 0..5 {
            assert_eq!(extract_keywords(doc, &emb, m).len(), m);
        }
    }

    #[test]
    fn ranking_is_stable() {
        let doc = "graph search graph kernel memory graph kernel FPGA memory";
        let emb = BagOfWordsEmbedder::fit([doc]);
        assert_eq!(extract_keywords(doc, &emb, 6), extract_keywords(doc, &emb, 6));
    }

    #[test]
    fn keyword_serializes_as_pair() {
        let k = Keyword { phrase: "polymer".into(), score: 0.5 };
        assert_eq!(serde_json::to_string(&k).unwrap(), "[\"polymer\",0.5]");
    }
}
