//! A small pre-norm encoder-decoder transformer used as the reference
//! generative backbone.

use candle_core::{DType, Device, Module, Result, Tensor, Var, D};
use candle_nn::Linear;
use serde::{Deserialize, Serialize};

use super::params::ParamStore;
use super::{Seq2SeqBackbone, SequenceEncoder};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seq2SeqConfig {
    pub vocab_size: usize,
    pub d_model: usize,
    pub num_heads: usize,
    pub ffn_dim: usize,
    pub num_layers: usize,
    pub max_positions: usize,
}

impl Seq2SeqConfig {
    pub fn toy(vocab_size: usize) -> Self {
        Self {
            vocab_size,
            d_model: 32,
            num_heads: 2,
            ffn_dim: 64,
            num_layers: 2,
            max_positions: 1024,
        }
    }
}

pub(crate) fn softmax_last(xs: &Tensor) -> Result<Tensor> {
    let max = xs.max_keepdim(D::Minus1)?.detach();
    let e = xs.broadcast_sub(&max)?.exp()?;
    e.broadcast_div(&e.sum_keepdim(D::Minus1)?)
}

pub(crate) fn log_softmax_last(xs: &Tensor) -> Result<Tensor> {
    let max = xs.max_keepdim(D::Minus1)?.detach();
    let shifted = xs.broadcast_sub(&max)?;
    let lse = shifted.exp()?.sum_keepdim(D::Minus1)?.log()?;
    shifted.broadcast_sub(&lse)
}

struct RmsNorm {
    weight: Tensor,
}

impl RmsNorm {
    fn new(store: &mut ParamStore, name: &str, dim: usize) -> Result<Self> {
        Ok(Self { weight: store.constant(name, &[dim], 1.0)? })
    }

    fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let ms = x.sqr()?.mean_keepdim(D::Minus1)?;
        let inv = (ms + 1e-6)?.sqrt()?.recip()?;
        x.broadcast_mul(&inv)?.broadcast_mul(&self.weight)
    }
}

fn linear(store: &mut ParamStore, name: &str, in_dim: usize, out_dim: usize) -> Result<Linear> {
    Ok(Linear::new(store.glorot(&format!("{name}.weight"), out_dim, in_dim)?, None))
}

struct Attention {
    q: Linear,
    k: Linear,
    v: Linear,
    o: Linear,
    heads: usize,
}

impl Attention {
    fn new(store: &mut ParamStore, name: &str, d: usize, heads: usize) -> Result<Self> {
        Ok(Self {
            q: linear(store, &format!("{name}.q"), d, d)?,
            k: linear(store, &format!("{name}.k"), d, d)?,
            v: linear(store, &format!("{name}.v"), d, d)?,
            o: linear(store, &format!("{name}.o"), d, d)?,
            heads,
        })
    }

    fn split(&self, x: &Tensor) -> Result<Tensor> {
        let (b, t, d) = x.dims3()?;
        x.reshape((b, t, self.heads, d / self.heads))?
            .transpose(1, 2)?
            .contiguous()
    }

    /// `bias` broadcasts to `[b, heads, tq, tk]`.
    fn forward(&self, xq: &Tensor, xkv: &Tensor, bias: &Tensor) -> Result<Tensor> {
        let (b, tq, d) = xq.dims3()?;
        let q = self.split(&self.q.forward(xq)?)?;
        let k = self.split(&self.k.forward(xkv)?)?;
        let v = self.split(&self.v.forward(xkv)?)?;
        let scale = 1.0 / ((d / self.heads) as f64).sqrt();
        let scores = (q.matmul(&k.t()?.contiguous()?)? * scale)?.broadcast_add(bias)?;
        let ctx = softmax_last(&scores)?.matmul(&v)?;
        let ctx = ctx.transpose(1, 2)?.contiguous()?.reshape((b, tq, d))?;
        self.o.forward(&ctx)
    }
}

struct FeedForward {
    wi: Linear,
    wo: Linear,
}

impl FeedForward {
    fn new(store: &mut ParamStore, name: &str, d: usize, ffn: usize) -> Result<Self> {
        Ok(Self {
            wi: linear(store, &format!("{name}.wi"), d, ffn)?,
            wo: linear(store, &format!("{name}.wo"), ffn, d)?,
        })
    }

    fn forward(&self, x: &Tensor) -> Result<Tensor> {
        self.wo.forward(&self.wi.forward(x)?.relu()?)
    }
}

struct EncoderLayer {
    norm1: RmsNorm,
    attn: Attention,
    norm2: RmsNorm,
    ffn: FeedForward,
}

struct DecoderLayer {
    norm1: RmsNorm,
    self_attn: Attention,
    norm2: RmsNorm,
    cross_attn: Attention,
    norm3: RmsNorm,
    ffn: FeedForward,
}

/// Encoder-decoder transformer with learned positions, RMS norms and a
/// shared token embedding.
pub struct TinySeq2Seq {
    cfg: Seq2SeqConfig,
    embed: Tensor,
    enc_pos: Tensor,
    dec_pos: Tensor,
    enc_layers: Vec<EncoderLayer>,
    enc_norm: RmsNorm,
    dec_layers: Vec<DecoderLayer>,
    dec_norm: RmsNorm,
    lm_head: Linear,
    store: ParamStore,
}

impl TinySeq2Seq {
    pub fn new(cfg: Seq2SeqConfig, seed: u64, dtype: DType, device: &Device) -> Result<Self> {
        if cfg.d_model % cfg.num_heads != 0 {
            candle_core::bail!("d_model {} not divisible by {} heads", cfg.d_model, cfg.num_heads);
        }
        let mut store = ParamStore::new(seed, dtype, device);
        let d = cfg.d_model;
        let embed = store.uniform("shared.embed", &[cfg.vocab_size, d], 0.5)?;
        let enc_pos = store.uniform("encoder.pos", &[cfg.max_positions, d], 0.1)?;
        let dec_pos = store.uniform("decoder.pos", &[cfg.max_positions, d], 0.1)?;
        let mut enc_layers = Vec::new();
        for l in 0..cfg.num_layers {
            let p = format!("encoder.{l}");
            enc_layers.push(EncoderLayer {
                norm1: RmsNorm::new(&mut store, &format!("{p}.norm1"), d)?,
                attn: Attention::new(&mut store, &format!("{p}.attn"), d, cfg.num_heads)?,
                norm2: RmsNorm::new(&mut store, &format!("{p}.norm2"), d)?,
                ffn: FeedForward::new(&mut store, &format!("{p}.ffn"), d, cfg.ffn_dim)?,
            });
        }
        let enc_norm = RmsNorm::new(&mut store, "encoder.final_norm", d)?;
        let mut dec_layers = Vec::new();
        for l in 0..cfg.num_layers {
            let p = format!("decoder.{l}");
            dec_layers.push(DecoderLayer {
                norm1: RmsNorm::new(&mut store, &format!("{p}.norm1"), d)?,
                self_attn: Attention::new(&mut store, &format!("{p}.self_attn"), d, cfg.num_heads)?,
                norm2: RmsNorm::new(&mut store, &format!("{p}.norm2"), d)?,
                cross_attn: Attention::new(&mut store, &format!("{p}.cross_attn"), d, cfg.num_heads)?,
                norm3: RmsNorm::new(&mut store, &format!("{p}.norm3"), d)?,
                ffn: FeedForward::new(&mut store, &format!("{p}.ffn"), d, cfg.ffn_dim)?,
            });
        }
        let dec_norm = RmsNorm::new(&mut store, "decoder.final_norm", d)?;
        let lm_head = linear(&mut store, "lm_head", d, cfg.vocab_size)?;
        Ok(Self {
            cfg,
            embed,
            enc_pos,
            dec_pos,
            enc_layers,
            enc_norm,
            dec_layers,
            dec_norm,
            lm_head,
            store,
        })
    }

    pub fn config(&self) -> &Seq2SeqConfig {
        &self.cfg
    }

    pub fn store(&self) -> &ParamStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn positions(&self, table: &Tensor, len: usize) -> Result<Tensor> {
        if len > self.cfg.max_positions {
            candle_core::bail!("sequence length {len} exceeds {} positions", self.cfg.max_positions);
        }
        table.narrow(0, 0, len)
    }
}

/// Additive attention bias `[b, 1, 1, t]` from a `[b, t]` keep-mask.
pub fn padding_bias(mask: &Tensor) -> Result<Tensor> {
    let (b, t) = mask.dims2()?;
    ((mask - 1.0)? * 1e9)?.reshape((b, 1, 1, t))
}

fn causal_bias(len: usize, dtype: DType, device: &Device) -> Result<Tensor> {
    let values: Vec<f64> = (0..len)
        .flat_map(|i| (0..len).map(move |j| if j <= i { 0.0 } else { -1e9 }))
        .collect();
    Tensor::from_vec(values, (1, 1, len, len), device)?.to_dtype(dtype)
}

impl SequenceEncoder for TinySeq2Seq {
    fn hidden_dim(&self) -> usize {
        self.cfg.d_model
    }

    fn embed_tokens(&self, ids: &Tensor) -> Result<Tensor> {
        let (b, t) = ids.dims2()?;
        self.embed
            .index_select(&ids.flatten_all()?, 0)?
            .reshape((b, t, self.cfg.d_model))
    }

    fn encode(&self, embeds: &Tensor, mask: &Tensor) -> Result<Tensor> {
        let (_, t, _) = embeds.dims3()?;
        let mut x = embeds.broadcast_add(&self.positions(&self.enc_pos, t)?)?;
        let bias = padding_bias(mask)?;
        for layer in &self.enc_layers {
            let h = layer.norm1.forward(&x)?;
            x = (&x + layer.attn.forward(&h, &h, &bias)?)?;
            let h = layer.norm2.forward(&x)?;
            x = (&x + layer.ffn.forward(&h)?)?;
        }
        self.enc_norm.forward(&x)
    }
}

impl Seq2SeqBackbone for TinySeq2Seq {
    fn vocab_size(&self) -> usize {
        self.cfg.vocab_size
    }

    fn decode(&self, encoded: &Tensor, enc_mask: &Tensor, decoder_ids: &Tensor) -> Result<Tensor> {
        let (_, s) = decoder_ids.dims2()?;
        let mut y = self
            .embed_tokens(decoder_ids)?
            .broadcast_add(&self.positions(&self.dec_pos, s)?)?;
        let self_bias = causal_bias(s, y.dtype(), y.device())?;
        let cross_bias = padding_bias(enc_mask)?;
        for layer in &self.dec_layers {
            let h = layer.norm1.forward(&y)?;
            y = (&y + layer.self_attn.forward(&h, &h, &self_bias)?)?;
            let h = layer.norm2.forward(&y)?;
            y = (&y + layer.cross_attn.forward(&h, encoded, &cross_bias)?)?;
            let h = layer.norm3.forward(&y)?;
            y = (&y + layer.ffn.forward(&h)?)?;
        }
        self.lm_head.forward(&self.dec_norm.forward(&y)?)
    }

    fn trainable_vars(&self) -> Vec<Var> {
        self.store.vars()
    }
}
