use crate::text;

use super::ngram::{clipped_overlap, counts, total};

/// ROUGE-N F-measure in percent.
pub fn rouge_n(hypothesis: &str, reference: &str, n: usize) -> f64 {
    rouge_n_tokens(&text::tokenize(hypothesis), &text::tokenize(reference), n)
}

pub fn rouge_n_tokens(hyp: &[String], reference: &[String], n: usize) -> f64 {
    let h = counts(hyp, n);
    let r = counts(reference, n);
    let (th, tr) = (total(&h), total(&r));
    if th == 0 || tr == 0 {
        return 0.0;
    }
    let overlap = clipped_overlap(&h, &r) as f64;
    if overlap == 0.0 {
        return 0.0;
    }
    let p = overlap / th as f64;
    let rc = overlap / tr as f64;
    100.0 * 2.0 * p * rc / (p + rc)
}
