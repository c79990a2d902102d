//! Soft prompt encoder.
//!
//! Keyword token sequences (subject terms, extracted positives, sampled
//! negatives) run through the backbone's own encoder stack; a trainable
//! position-wise projection followed by ReLU turns the last hidden state
//! `h` (`[n, d]`) into the representation `r = ReLU(W·h + b)`. Padding
//! positions are zeroed so they never contribute to dot products.

use std::path::Path;

use candle_core::{DType, Device, Tensor, D};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ParamStore, SequenceEncoder, PAD};

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("keyword token sequence is empty")]
    EmptyKeywords,
    #[error("representation shapes differ: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("invalid encoder configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Tensor(#[from] candle_core::Error),
}

/// Which path produced a representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Key,
    Pos,
    Neg,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub hidden_dim: usize,
    pub keyword_len: usize,
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<(), EncoderError> {
        if self.hidden_dim == 0 || self.keyword_len == 0 {
            return Err(EncoderError::Config(format!(
                "hidden_dim and keyword_len must be positive, got {} and {}",
                self.hidden_dim, self.keyword_len
            )));
        }
        Ok(())
    }
}

/// A `[keyword_len, hidden_dim]` non-negative matrix.
#[derive(Debug, Clone)]
pub struct Representation {
    pub values: Tensor,
    pub tag: Provenance,
}

impl Representation {
    pub fn shape(&self) -> Vec<usize> {
        self.values.dims().to_vec()
    }

    pub fn to_vec(&self) -> Result<Vec<f64>, EncoderError> {
        Ok(self.values.flatten_all()?.to_dtype(DType::F64)?.to_vec1()?)
    }
}

/// Dot product of the flattened representations.
pub fn similarity(a: &Representation, b: &Representation) -> Result<f64, EncoderError> {
    if a.values.dims() != b.values.dims() {
        return Err(EncoderError::ShapeMismatch { left: a.shape(), right: b.shape() });
    }
    Ok(batch_similarity(&a.values.unsqueeze(0)?, &b.values.unsqueeze(0)?)?
        .to_dtype(DType::F64)?
        .to_vec1::<f64>()?[0])
}

/// Row-wise flattened dot products of two `[b, n, d]` tensors, giving `[b]`.
pub fn batch_similarity(a: &Tensor, b: &Tensor) -> candle_core::Result<Tensor> {
    (a * b)?.flatten_from(1)?.sum(D::Minus1)
}

pub const HEAD_SCHEMA: &str = "agp-prompt-head/1";

#[derive(Serialize, Deserialize)]
struct HeadSidecar {
    schema: String,
    config: EncoderConfig,
}

pub struct PromptEncoder {
    cfg: EncoderConfig,
    store: ParamStore,
    weight: Tensor,
    bias: Tensor,
}

impl PromptEncoder {
    pub fn new(cfg: EncoderConfig, seed: u64, dtype: DType, device: &Device) -> Result<Self, EncoderError> {
        cfg.validate()?;
        let mut store = ParamStore::new(seed, dtype, device);
        let d = cfg.hidden_dim;
        let weight = store.glorot("prompt.proj.weight", d, d)?;
        let bias = store.constant("prompt.proj.bias", &[d], 0.1)?;
        Ok(Self { cfg, store, weight, bias })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.cfg
    }

    pub fn store(&self) -> &ParamStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    /// Right-pads (or truncates) to `keyword_len`, returning ids and keep-mask.
    pub fn pad(&self, tokens: &[u32]) -> (Vec<u32>, Vec<f64>) {
        let n = self.cfg.keyword_len;
        let mut ids: Vec<u32> = tokens.iter().copied().take(n).collect();
        let mut mask = vec![1.0; ids.len()];
        ids.resize(n, PAD);
        mask.resize(n, 0.0);
        (ids, mask)
    }

    /// `ReLU(h·Wᵀ + b)` per position, zeroed where `mask` is 0.
    pub fn project(&self, hidden: &Tensor, mask: &Tensor) -> candle_core::Result<Tensor> {
        let r = hidden
            .broadcast_matmul(&self.weight.t()?)?
            .broadcast_add(&self.bias)?
            .relu()?;
        r.broadcast_mul(&mask.unsqueeze(D::Minus1)?)
    }

    /// Encodes a batch of keyword sequences, returning `[b, n, d]`
    /// representations and their `[b, n]` masks.
    pub fn encode_batch(
        &self,
        encoder: &dyn SequenceEncoder,
        batch: &[Vec<u32>],
    ) -> Result<(Tensor, Tensor), EncoderError> {
        if batch.is_empty() || batch.iter().any(Vec::is_empty) {
            return Err(EncoderError::EmptyKeywords);
        }
        if encoder.hidden_dim() != self.cfg.hidden_dim {
            return Err(EncoderError::Config(format!(
                "encoder hidden size {} does not match projection size {}",
                encoder.hidden_dim(),
                self.cfg.hidden_dim
            )));
        }
        let n = self.cfg.keyword_len;
        let mut ids = Vec::with_capacity(batch.len() * n);
        let mut masks = Vec::with_capacity(batch.len() * n);
        for tokens in batch {
            let (i, m) = self.pad(tokens);
            ids.extend(i);
            masks.extend(m);
        }
        let device = self.weight.device();
        let ids = Tensor::from_vec(ids, (batch.len(), n), device)?;
        let mask = Tensor::from_vec(masks, (batch.len(), n), device)?.to_dtype(self.weight.dtype())?;
        let hidden = encoder.encode(&encoder.embed_tokens(&ids)?, &mask)?;
        Ok((self.project(&hidden, &mask)?, mask))
    }

    pub fn encode(
        &self,
        encoder: &dyn SequenceEncoder,
        tokens: &[u32],
        tag: Provenance,
    ) -> Result<Representation, EncoderError> {
        let (r, _) = self.encode_batch(encoder, &[tokens.to_vec()])?;
        Ok(Representation { values: r.squeeze(0)?, tag })
    }

    /// Writes `prompt_head.safetensors` (W, b) and the `prompt_head.json` sidecar.
    pub fn save(&self, dir: &Path) -> Result<(), EncoderError> {
        self.store.save(&dir.join("prompt_head.safetensors"))?;
        let sidecar = HeadSidecar { schema: HEAD_SCHEMA.to_string(), config: self.cfg.clone() };
        std::fs::write(
            dir.join("prompt_head.json"),
            serde_json::to_vec_pretty(&sidecar).map_err(|e| EncoderError::Config(e.to_string()))?,
        )
        .map_err(|e| EncoderError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn load(dir: &Path, dtype: DType, device: &Device) -> Result<Self, EncoderError> {
        let raw = std::fs::read(dir.join("prompt_head.json")).map_err(|e| EncoderError::Config(e.to_string()))?;
        let sidecar: HeadSidecar =
            serde_json::from_slice(&raw).map_err(|e| EncoderError::Config(e.to_string()))?;
        if sidecar.schema != HEAD_SCHEMA {
            return Err(EncoderError::Config(format!("unsupported schema {}", sidecar.schema)));
        }
        let mut enc = Self::new(sidecar.config, 0, dtype, device)?;
        enc.store.load(&dir.join("prompt_head.safetensors"))?;
        Ok(enc)
    }
}
