use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::text;

/// Words of `source_tokens` eligible as negatives: distinct, containing a
/// letter, not a stop word, and neither a positive phrase nor a word of one.
/// Comparison is case-insensitive; first-occurrence order is kept.
pub fn eligible_negatives<S: AsRef<str>>(source_tokens: &[S], positives: &[S]) -> Vec<String> {
    let mut banned: HashSet<String> = HashSet::new();
    for p in positives {
        let p = p.as_ref().to_lowercase();
        banned.extend(text::word_tokens(&p));
        banned.insert(p);
    }
    let mut seen = HashSet::new();
    source_tokens
        .iter()
        .map(|t| t.as_ref().to_lowercase())
        .filter(|t| t.chars().any(char::is_alphabetic) && !text::is_stop_word(t) && !banned.contains(t))
        .filter(|t| seen.insert(t.clone()))
        .collect()
}

/// Uniform sample of `count` distinct eligible source words, without
/// replacement and deterministic in `seed`. Returns every eligible word
/// when fewer than `count` exist.
pub fn sample_negatives<S: AsRef<str>>(
    source_tokens: &[S],
    positives: &[S],
    count: usize,
    seed: u64,
) -> Vec<String> {
    let pool = eligible_negatives(source_tokens, positives);
    if pool.is_empty() {
        tracing::warn!("no eligible negative keywords in source");
        return pool;
    }
    if pool.len() <= count {
        return pool;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, pool.len(), count)
        .into_iter()
        .map(|i| pool[i].clone())
        .collect()
}
