//! Temperature sampling over a next-token distribution.

use rand::Rng;

use super::DecodeError;

/// `softmax(logits / tau)` computed with max subtraction.
pub fn temperature_probs(logits: &[f64], tau: f64) -> Result<Vec<f64>, DecodeError> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(DecodeError::Config(format!("temperature must lie in (0, 1], got {tau}")));
    }
    if logits.is_empty() {
        return Err(DecodeError::Config("empty logit vector".into()));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| ((l - max) / tau).exp()).collect();
    let z: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / z).collect())
}

/// Keeps the `k` most probable entries (lowest index wins ties) and renormalizes.
pub fn truncate_top_k(probs: &mut [f64], k: usize) {
    if k == 0 || k >= probs.len() {
        return;
    }
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    for &i in &order[k..] {
        probs[i] = 0.0;
    }
    let z: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= z;
    }
}

/// Draws one index from a normalized distribution by inverse CDF.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            last_nonzero = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_nonzero
}

/// Samples the next token from `softmax(logits / tau)`, optionally
/// restricted to the `top_k` most likely tokens.
pub fn temperature_sample<R: Rng + ?Sized>(
    logits: &[f64],
    tau: f64,
    top_k: Option<usize>,
    rng: &mut R,
) -> Result<usize, DecodeError> {
    let mut probs = temperature_probs(logits, tau)?;
    if let Some(k) = top_k {
        truncate_top_k(&mut probs, k);
    }
    Ok(sample_index(&probs, rng))
}
