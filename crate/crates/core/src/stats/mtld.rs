use serde::{Deserialize, Serialize};

pub const TTR_THRESHOLD: f64 = 0.72;
pub const MIN_TOKENS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mtld {
    /// `None` when no factor was completed in either direction.
    pub value: Option<f64>,
    pub tokens: usize,
}

impl Mtld {
    /// Texts under [`MIN_TOKENS`] tokens give unstable estimates.
    pub fn reliable(&self) -> bool {
        self.tokens >= MIN_TOKENS
    }
}

/// Factor count of one directional pass.
pub fn factor_count<S: AsRef<str>>(tokens: impl Iterator<Item = S>) -> f64 {
    let mut factors = 0.0;
    let mut types = std::collections::HashSet::new();
    let mut count = 0usize;
    let mut ttr = 1.0;
    for t in tokens {
        count += 1;
        types.insert(t.as_ref().to_string());
        ttr = types.len() as f64 / count as f64;
        if ttr < TTR_THRESHOLD {
            factors += 1.0;
            types.clear();
            count = 0;
            ttr = 1.0;
        }
    }
    if count > 0 {
        factors += (1.0 - ttr) / (1.0 - TTR_THRESHOLD);
    }
    factors
}

fn directional<S: AsRef<str>>(n: usize, tokens: impl Iterator<Item = S>) -> Option<f64> {
    let f = factor_count(tokens);
    (f > 0.0).then(|| n as f64 / f)
}

/// Bidirectional MTLD: mean of the forward and reversed passes.
pub fn mtld<S: AsRef<str>>(tokens: &[S]) -> Mtld {
    let n = tokens.len();
    let fwd = directional(n, tokens.iter());
    let bwd = directional(n, tokens.iter().rev());
    let value = match (fwd, bwd) {
        (Some(a), Some(b)) => Some((a + b) / 2.0),
        (Some(a), None) | (None, Some(a)) => Some(a),
        (None, None) => None,
    };
    Mtld { value, tokens: n }
}
