//! Evaluation metrics over (source, reference, hypothesis) triples.

pub mod adapters;
pub mod bleu;
pub mod ltcr;
pub mod meteor;
pub mod ngram;
pub mod report;
pub mod rouge;
pub mod sari;

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::College;

pub use adapters::{AdapterRegistry, HttpAdapter, MetricAdapter, ReferenceBertScore};
pub use bleu::{bleu, BleuMode};
pub use ltcr::ltcr;
pub use meteor::meteor;
pub use report::{fres, report, write_report, MetricReport, MetricRow};
pub use rouge::rouge_n;
pub use sari::sari;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no triples to evaluate")]
    Empty,
    #[error("triple {index} has an empty {field}")]
    InvalidTriple { index: usize, field: &'static str },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalTriple {
    pub source: String,
    pub reference: String,
    pub hypothesis: String,
    pub college: Option<College>,
}

impl EvalTriple {
    /// Source and reference must be non-empty. An empty hypothesis is
    /// accepted with a warning and scores zero on overlap metrics.
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.source.trim().is_empty() {
            return Err("source");
        }
        if self.reference.trim().is_empty() {
            return Err("reference");
        }
        if self.hypothesis.trim().is_empty() {
            tracing::warn!("empty hypothesis");
        }
        Ok(())
    }
}

/// Reads one triple per non-blank line.
pub fn read_triples<R: BufRead>(reader: R) -> Result<Vec<EvalTriple>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let t = serde_json::from_str(&line).map_err(|e| EvalError::Parse { line: i + 1, message: e.to_string() })?;
        out.push(t);
    }
    Ok(out)
}
