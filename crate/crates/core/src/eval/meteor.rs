//! METEOR with exact and stem matching stages.

use rust_stemmers::{Algorithm, Stemmer};

use crate::text;

pub const ALPHA: f64 = 0.9;
pub const BETA: f64 = 3.0;
pub const GAMMA: f64 = 0.5;

/// Hypothesis-to-reference index pairs, in hypothesis order.
pub fn align(hyp: &[String], reference: &[String]) -> Vec<(usize, usize)> {
    let stemmer = Stemmer::create(Algorithm::English);
    let mut ref_used = vec![false; reference.len()];
    let mut hyp_match: Vec<Option<usize>> = vec![None; hyp.len()];
    for (i, h) in hyp.iter().enumerate() {
        if let Some(j) = (0..reference.len()).find(|&j| !ref_used[j] && reference[j] == *h) {
            ref_used[j] = true;
            hyp_match[i] = Some(j);
        }
    }
    let ref_stems: Vec<String> = reference.iter().map(|w| stemmer.stem(w).into_owned()).collect();
    for (i, h) in hyp.iter().enumerate() {
        if hyp_match[i].is_some() {
            continue;
        }
        let stem = stemmer.stem(h);
        if let Some(j) = (0..reference.len()).find(|&j| !ref_used[j] && ref_stems[j] == stem) {
            ref_used[j] = true;
            hyp_match[i] = Some(j);
        }
    }
    hyp_match
        .into_iter()
        .enumerate()
        .filter_map(|(i, m)| m.map(|j| (i, j)))
        .collect()
}

/// Runs of matches adjacent in both hypothesis and reference.
pub fn chunks(alignment: &[(usize, usize)]) -> usize {
    if alignment.is_empty() {
        return 0;
    }
    1 + alignment
        .windows(2)
        .filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1))
        .count()
}

pub fn meteor_tokens(hyp: &[String], reference: &[String]) -> f64 {
    let alignment = align(hyp, reference);
    let m = alignment.len() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let p = m / hyp.len() as f64;
    let r = m / reference.len() as f64;
    let fmean = p * r / (ALPHA * p + (1.0 - ALPHA) * r);
    let penalty = GAMMA * (chunks(&alignment) as f64 / m).powf(BETA);
    100.0 * fmean * (1.0 - penalty)
}

/// METEOR in percent over lowercased word tokens.
pub fn meteor(hypothesis: &str, reference: &str) -> f64 {
    meteor_tokens(&text::word_tokens(hypothesis), &text::word_tokens(reference))
}
