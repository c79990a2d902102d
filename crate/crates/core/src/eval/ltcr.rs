//! Lexical translation consistency over terms repeated across sources.
//!
//! A term is a lowercased non-stop-word alphabetic token of at least three
//! characters. For every term found in at least two source documents, each
//! occurrence is rendered as the term itself when the matching hypothesis
//! contains it, otherwise as the hypothesis token with the highest character
//! similarity. A term's consistency is the share of its modal rendering.

use std::collections::{BTreeMap, BTreeSet};

use crate::decode::levenshtein::char_similarity;
use crate::text;

use super::EvalTriple;

pub const MIN_DOCUMENTS: usize = 2;

fn is_term(tok: &str) -> bool {
    tok.chars().count() >= 3 && tok.chars().all(char::is_alphabetic) && !text::is_stop_word(tok)
}

/// Distinct terms of a source, sorted.
pub fn source_terms(source: &str) -> BTreeSet<String> {
    text::word_tokens(source).into_iter().filter(|t| is_term(t)).collect()
}

/// How `term` is rendered in a tokenized hypothesis. Ties keep the earliest token.
pub fn rendering(term: &str, hyp: &[String]) -> String {
    if hyp.iter().any(|t| t == term) {
        return term.to_string();
    }
    let mut best: Option<(&String, f64)> = None;
    for t in hyp {
        let s = char_similarity(term, t);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((t, s));
        }
    }
    best.map(|(t, _)| t.clone()).unwrap_or_default()
}

/// Per-term consistency ratios in [0, 1], keyed by term.
pub fn term_consistency(triples: &[EvalTriple]) -> BTreeMap<String, f64> {
    let mut occurrences: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, t) in triples.iter().enumerate() {
        for term in source_terms(&t.source) {
            occurrences.entry(term).or_default().push(i);
        }
    }
    let hyps: Vec<Vec<String>> = triples.iter().map(|t| text::word_tokens(&t.hypothesis)).collect();
    occurrences
        .into_iter()
        .filter(|(_, docs)| docs.len() >= MIN_DOCUMENTS)
        .map(|(term, docs)| {
            let mut tally: BTreeMap<String, usize> = BTreeMap::new();
            for &d in &docs {
                *tally.entry(rendering(&term, &hyps[d])).or_insert(0) += 1;
            }
            let modal = tally.values().copied().max().unwrap_or(0);
            let ratio = modal as f64 / docs.len() as f64;
            (term, ratio)
        })
        .collect()
}

/// Mean term consistency in percent; `None` when no term repeats.
pub fn ltcr(triples: &[EvalTriple]) -> Option<f64> {
    let terms = term_consistency(triples);
    if terms.is_empty() {
        return None;
    }
    Some(100.0 * terms.values().sum::<f64>() / terms.len() as f64)
}
