use serde::{Deserialize, Serialize};

use crate::text;

use super::ngram::{clipped_overlap, counts, total};

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BleuMode {
    Sentence,
    Document,
}

/// BLEU of one segment, in percent.
///
/// Orders for which the hypothesis has no n-grams are left out and the
/// remaining weights renormalized. `smooth` applies add-one smoothing to
/// orders above one.
pub fn segment_bleu(hyp: &[String], reference: &[String], smooth: bool) -> f64 {
    if hyp.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    let mut orders = 0usize;
    for n in 1..=MAX_ORDER {
        let h = counts(hyp, n);
        let t = total(&h);
        if t == 0 {
            continue;
        }
        let m = clipped_overlap(&h, &counts(reference, n));
        let p = if smooth && n > 1 {
            (m as f64 + 1.0) / (t as f64 + 1.0)
        } else {
            m as f64 / t as f64
        };
        if p == 0.0 {
            return 0.0;
        }
        log_sum += p.ln();
        orders += 1;
    }
    let (c, r) = (hyp.len() as f64, reference.len() as f64);
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    100.0 * bp * (log_sum / orders as f64).exp()
}

/// Document BLEU treats each side as one segment. Sentence BLEU pairs
/// sentences by position, scores each pair with smoothing and averages;
/// unpaired trailing sentences are ignored with a warning.
pub fn bleu(hypothesis: &str, reference: &str, mode: BleuMode) -> f64 {
    if text::tokenize(hypothesis).is_empty() {
        tracing::warn!("empty hypothesis scores 0 BLEU");
        return 0.0;
    }
    match mode {
        BleuMode::Document => segment_bleu(&text::tokenize(hypothesis), &text::tokenize(reference), false),
        BleuMode::Sentence => {
            let hs = text::split_sentences(hypothesis);
            let rs = text::split_sentences(reference);
            if hs.len() != rs.len() {
                tracing::warn!(hypothesis = hs.len(), reference = rs.len(), "sentence counts differ, tail ignored");
            }
            let pairs = hs.len().min(rs.len());
            if pairs == 0 {
                return 0.0;
            }
            let sum: f64 = hs
                .iter()
                .zip(&rs)
                .map(|(h, r)| segment_bleu(&text::tokenize(h), &text::tokenize(r), true))
                .sum();
            sum / pairs as f64
        }
    }
}
