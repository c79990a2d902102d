//! Generative, contrastive and hybrid objectives.
//!
//! Each loss has a plain `f64` form (with analytic gradients, used for
//! checking) and a tensor form used inside the training graph.

use candle_core::{Tensor, D};
use thiserror::Error;

use crate::model::log_softmax_last;

#[derive(Debug, Error, PartialEq)]
pub enum LossError {
    #[error("invalid loss configuration: {0}")]
    Config(String),
    #[error("representation length mismatch: {0} vs {1}")]
    ShapeMismatch(usize, usize),
    #[error("contrastive loss needs at least one negative")]
    NoNegatives,
    #[error("target sequence is empty")]
    EmptyTarget,
    #[error("target token {token} outside vocabulary of {vocab}")]
    TokenOutOfRange { token: usize, vocab: usize },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// InfoNCE from raw similarity scores.
pub fn info_nce_from_scores(pos: f64, negatives: &[f64], tau: f64) -> Result<f64, LossError> {
    if !(tau > 0.0) {
        return Err(LossError::Config(format!("temperature must be positive, got {tau}")));
    }
    if negatives.is_empty() {
        return Err(LossError::NoNegatives);
    }
    let mut logits = Vec::with_capacity(negatives.len() + 1);
    logits.push(pos / tau);
    logits.extend(negatives.iter().map(|s| s / tau));
    Ok(log_sum_exp(&logits) - pos / tau)
}

fn check_shapes(key: &[f64], pos: &[f64], negatives: &[Vec<f64>]) -> Result<(), LossError> {
    if key.len() != pos.len() {
        return Err(LossError::ShapeMismatch(key.len(), pos.len()));
    }
    if let Some(n) = negatives.iter().find(|n| n.len() != key.len()) {
        return Err(LossError::ShapeMismatch(key.len(), n.len()));
    }
    Ok(())
}

/// `-log( e^{k·p/τ} / (e^{k·p/τ} + Σ_neg e^{k·n/τ}) )`.
pub fn info_nce(key: &[f64], pos: &[f64], negatives: &[Vec<f64>], tau: f64) -> Result<f64, LossError> {
    check_shapes(key, pos, negatives)?;
    let negs: Vec<f64> = negatives.iter().map(|n| dot(key, n)).collect();
    info_nce_from_scores(dot(key, pos), &negs, tau)
}

/// Gradients of [`info_nce`] with respect to key, positive and each negative.
pub struct InfoNceGrad {
    pub key: Vec<f64>,
    pub pos: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn info_nce_grad(
    key: &[f64],
    pos: &[f64],
    negatives: &[Vec<f64>],
    tau: f64,
) -> Result<InfoNceGrad, LossError> {
    check_shapes(key, pos, negatives)?;
    if negatives.is_empty() {
        return Err(LossError::NoNegatives);
    }
    let mut z = vec![dot(key, pos) / tau];
    z.extend(negatives.iter().map(|n| dot(key, n) / tau));
    let lse = log_sum_exp(&z);
    let w: Vec<f64> = z.iter().map(|x| (x - lse).exp()).collect();
    let c_pos = (w[0] - 1.0) / tau;
    let mut g_key: Vec<f64> = pos.iter().map(|p| c_pos * p).collect();
    for (wj, n) in w[1..].iter().zip(negatives) {
        for (g, x) in g_key.iter_mut().zip(n) {
            *g += wj / tau * x;
        }
    }
    Ok(InfoNceGrad {
        key: g_key,
        pos: key.iter().map(|k| c_pos * k).collect(),
        negatives: w[1..].iter().map(|wj| key.iter().map(|k| wj / tau * k).collect()).collect(),
    })
}

/// Mean negative log-likelihood of `targets` under per-step probability rows.
pub fn ce_from_probs(probs: &[Vec<f64>], targets: &[usize]) -> Result<f64, LossError> {
    if targets.is_empty() {
        return Err(LossError::EmptyTarget);
    }
    let mut total = 0.0;
    for (row, &t) in probs.iter().zip(targets) {
        let p = *row.get(t).ok_or(LossError::TokenOutOfRange { token: t, vocab: row.len() })?;
        total -= p.ln();
    }
    Ok(total / targets.len() as f64)
}

/// Token-mean cross-entropy of `targets` given per-step logits.
pub fn ce_loss(logits: &[Vec<f64>], targets: &[usize]) -> Result<f64, LossError> {
    if targets.is_empty() {
        return Err(LossError::EmptyTarget);
    }
    let mut total = 0.0;
    for (row, &t) in logits.iter().zip(targets) {
        if t >= row.len() {
            return Err(LossError::TokenOutOfRange { token: t, vocab: row.len() });
        }
        total += log_sum_exp(row) - row[t];
    }
    Ok(total / targets.len() as f64)
}

/// `∂ ce_loss / ∂ logits = (softmax - onehot) / T`.
pub fn ce_loss_grad(logits: &[Vec<f64>], targets: &[usize]) -> Result<Vec<Vec<f64>>, LossError> {
    if targets.is_empty() {
        return Err(LossError::EmptyTarget);
    }
    let t_len = targets.len() as f64;
    Ok(logits
        .iter()
        .zip(targets)
        .map(|(row, &t)| {
            let lse = log_sum_exp(row);
            row.iter()
                .enumerate()
                .map(|(v, x)| ((x - lse).exp() - if v == t { 1.0 } else { 0.0 }) / t_len)
                .collect()
        })
        .collect())
}

/// `(1 - λ)·ce + λ·nce`.
pub fn hybrid_loss(ce: f64, nce: f64, lambda: f64) -> Result<f64, LossError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(LossError::Config(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    Ok((1.0 - lambda) * ce + lambda * nce)
}

/// Token-mean cross-entropy over `[b, s, V]` logits, `[b, s]` targets and a
/// `[b, s]` keep-mask. Returns a scalar tensor.
pub fn ce_loss_tensor(logits: &Tensor, targets: &Tensor, mask: &Tensor) -> candle_core::Result<Tensor> {
    let logp = log_softmax_last(logits)?;
    let picked = logp.gather(&targets.unsqueeze(D::Minus1)?, D::Minus1)?.squeeze(D::Minus1)?;
    let total = (picked * mask)?.sum_all()?;
    let count = mask.sum_all()?;
    total.neg()?.div(&count)
}

/// Batch-mean InfoNCE.
///
/// `key`, `pos`: `[b, F]`; `negatives`: `[b, K, F]`; `neg_mask`: `[b, K]`
/// with 1 for real negatives. Rows must have at least one real negative.
pub fn info_nce_tensor(
    key: &Tensor,
    pos: &Tensor,
    negatives: &Tensor,
    neg_mask: &Tensor,
    tau: f64,
) -> candle_core::Result<Tensor> {
    let s_pos = ((key * pos)?.sum_keepdim(D::Minus1)? / tau)?; // [b, 1]
    let s_neg = (negatives.broadcast_mul(&key.unsqueeze(1)?)?.sum(D::Minus1)? / tau)?; // [b, K]
    let s_neg = s_neg.broadcast_add(&((neg_mask - 1.0)? * 1e9)?)?;
    let all = Tensor::cat(&[&s_pos, &s_neg], 1)?;
    let lse = {
        let max = all.max_keepdim(D::Minus1)?.detach();
        (all.broadcast_sub(&max)?.exp()?.sum_keepdim(D::Minus1)?.log()? + max)?
    };
    (lse - s_pos)?.mean_all()
}
