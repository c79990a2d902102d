//! Dynamic prompt construction: keyword extraction, the prompt template and
//! negative keyword sampling.

pub mod keywords;
pub mod negatives;
pub mod template;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

pub use keywords::{extract_keywords, BagOfWordsEmbedder, Keyword, TextEmbedder};
pub use negatives::sample_negatives;
pub use template::{build_prompt, PromptTemplate, DYNAMIC_PREFIX, STATIC_PROMPT};

/// Ranked positives and sampled negatives for one source document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordSet {
    pub source_id: String,
    pub positives: Vec<Keyword>,
    pub negatives: Vec<String>,
}

impl KeywordSet {
    /// Extracts `count` positives and samples `negative_count` negatives.
    pub fn build(
        source_id: &str,
        document: &str,
        embedder: &dyn TextEmbedder,
        count: usize,
        negative_count: usize,
        seed: u64,
    ) -> Self {
        let positives = extract_keywords(document, embedder, count);
        let phrases: Vec<String> = positives.iter().map(|k| k.phrase.clone()).collect();
        let tokens = crate::text::word_tokens(document);
        let negatives = sample_negatives(&tokens, &phrases, negative_count, seed);
        Self { source_id: source_id.to_string(), positives, negatives }
    }

    pub fn phrases(&self) -> Vec<&str> {
        self.positives.iter().map(|k| k.phrase.as_str()).collect()
    }
}

pub fn write_jsonl<W: Write>(mut out: W, sets: &[KeywordSet]) -> std::io::Result<()> {
    for s in sets {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> std::io::Result<Vec<KeywordSet>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
