//! Pluggable encoder-decoder backbone and its word-level vocabulary.

mod params;
mod seq2seq;
mod vocab;

use candle_core::{Result, Tensor, Var};

pub use params::ParamStore;
pub use seq2seq::{padding_bias, Seq2SeqConfig, TinySeq2Seq};
pub(crate) use seq2seq::log_softmax_last;
pub use vocab::{Vocab, BOS, EOS, PAD, UNK};

/// The encoder half of a sequence-to-sequence model. The prompt encoder
/// runs keyword sequences through this same stack.
pub trait SequenceEncoder {
    fn hidden_dim(&self) -> usize;

    /// `[b, t]` token ids to `[b, t, d]` input embeddings.
    fn embed_tokens(&self, ids: &Tensor) -> Result<Tensor>;

    /// Last hidden state `[b, t, d]` for input embeddings and a `[b, t]`
    /// keep-mask (1 for real positions, 0 for padding).
    fn encode(&self, embeds: &Tensor, mask: &Tensor) -> Result<Tensor>;
}

/// A generative encoder-decoder language model.
pub trait Seq2SeqBackbone: SequenceEncoder {
    fn vocab_size(&self) -> usize;

    /// Teacher-forced next-token logits `[b, s, vocab]`.
    fn decode(&self, encoded: &Tensor, enc_mask: &Tensor, decoder_ids: &Tensor) -> Result<Tensor>;

    fn trainable_vars(&self) -> Vec<Var>;
}
