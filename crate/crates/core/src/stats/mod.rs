//! Corpus statistics: sentence counts and lengths, lexical diversity and readability.

pub mod mtld;
pub mod readability;
pub mod sentences;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::EtdRecord;
use crate::text;

pub use mtld::{mtld, Mtld};
pub use readability::{readability_consensus, GradeBand, TextCounts};
pub use sentences::{sentence_stats, SentenceStats};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("no documents given")]
    Empty,
    #[error("no document contains a sentence")]
    NoSentences,
    #[error("text has no sentences or words")]
    EmptyText,
}

/// Summary of one side (source or target) of a document collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideStats {
    pub avg_sentences: f64,
    pub avg_sentence_len: f64,
    /// Mean over documents with a defined value; `None` if there are none.
    pub mtld: Option<f64>,
    /// Documents under the reliability floor that contributed to `mtld`.
    pub mtld_unreliable_docs: usize,
    pub readability_consensus: GradeBand,
    pub readability_label: String,
}

pub fn side_stats<S: AsRef<str>>(documents: &[S]) -> Result<SideStats, StatsError> {
    let sent = sentence_stats(documents)?;
    let mut sum = 0.0;
    let mut defined = 0usize;
    let mut unreliable = 0usize;
    let mut grades = Vec::new();
    for d in documents {
        let m = mtld(&text::word_tokens(d.as_ref()));
        if let Some(v) = m.value {
            sum += v;
            defined += 1;
            if !m.reliable() {
                unreliable += 1;
            }
        }
        if let Ok(band) = readability_consensus(d.as_ref()) {
            grades.push(band.lower);
        }
    }
    let grade = readability::mode_lowest(&grades).ok_or(StatsError::NoSentences)?;
    let band = GradeBand::new(grade);
    Ok(SideStats {
        avg_sentences: sent.avg_sentences,
        avg_sentence_len: sent.avg_sentence_len,
        mtld: (defined > 0).then(|| sum / defined as f64),
        mtld_unreliable_docs: unreliable,
        readability_consensus: band,
        readability_label: band.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollegeStats {
    pub documents: usize,
    pub source: SideStats,
    pub target: SideStats,
}

pub fn college_stats(records: &[&EtdRecord]) -> Result<CollegeStats, StatsError> {
    let src: Vec<&str> = records.iter().map(|r| r.abstract_text.as_str()).collect();
    let tgt: Vec<&str> = records.iter().map(|r| r.abstract_general.as_str()).collect();
    Ok(CollegeStats {
        documents: records.len(),
        source: side_stats(&src)?,
        target: side_stats(&tgt)?,
    })
}

/// Per-college statistics keyed by college code, plus `"All"` over every row.
/// Rows without a college only count toward `"All"`.
pub fn stats_report(records: &[EtdRecord]) -> Result<BTreeMap<String, CollegeStats>, StatsError> {
    if records.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut groups: BTreeMap<String, Vec<&EtdRecord>> = BTreeMap::new();
    for r in records {
        if let Some(c) = r.college {
            groups.entry(c.code().to_string()).or_default().push(r);
        }
    }
    groups.insert("All".into(), records.iter().collect());
    groups
        .into_iter()
        .map(|(k, rs)| college_stats(&rs).map(|s| (k, s)))
        .collect()
}
