use std::collections::BTreeMap;

pub type Counts<'a> = BTreeMap<&'a [String], usize>;

pub fn counts(tokens: &[String], n: usize) -> Counts<'_> {
    let mut m = BTreeMap::new();
    if n == 0 || tokens.len() < n {
        return m;
    }
    for w in tokens.windows(n) {
        *m.entry(w).or_insert(0) += 1;
    }
    m
}

/// Σ min(hyp count, ref count) over hypothesis n-grams.
pub fn clipped_overlap(hyp: &Counts<'_>, reference: &Counts<'_>) -> usize {
    hyp.iter()
        .map(|(g, &c)| c.min(reference.get(g).copied().unwrap_or(0)))
        .sum()
}

pub fn total(c: &Counts<'_>) -> usize {
    c.values().sum()
}
