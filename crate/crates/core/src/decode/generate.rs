//! Candidate generation from a trained checkpoint.

use std::collections::HashMap;
use std::io::Write;

use candle_core::{DType, Device, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::EtdRecord;
use crate::eval::EvalTriple;
use crate::model::{Seq2SeqBackbone, SequenceEncoder, TinySeq2Seq, Vocab, BOS, EOS, PAD, UNK};
use crate::train::data::derive_seed;
use crate::train::trainer::encode_batch;
use crate::train::{Checkpoint, SamplePreparer};

use super::alignment::EmbeddingTableScorer;
use super::crowd::{argmax_first, crowd_select, CandidatePool};
use super::sampling::temperature_sample;
use super::DecodeError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub tau_decode: f64,
    pub gamma: f64,
    pub num_candidates: usize,
    pub max_output_tokens: usize,
    pub seed: u64,
    /// Optional top-k cutoff applied after temperature scaling.
    pub top_k: Option<usize>,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self { tau_decode: 0.5, gamma: 0.1, num_candidates: 16, max_output_tokens: 128, seed: 42, top_k: None }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<(), DecodeError> {
        if !(self.tau_decode > 0.0 && self.tau_decode <= 1.0) {
            return Err(DecodeError::Config(format!("tau_decode must lie in (0, 1], got {}", self.tau_decode)));
        }
        if !(self.gamma >= 0.0) {
            return Err(DecodeError::Config(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        if self.num_candidates == 0 || self.max_output_tokens == 0 {
            return Err(DecodeError::Config("num_candidates and max_output_tokens must be positive".into()));
        }
        Ok(())
    }
}

/// Token-embedding scorer built from the backbone's input embedding table.
pub fn embedding_scorer(model: &TinySeq2Seq, vocab: &Vocab) -> Result<EmbeddingTableScorer, DecodeError> {
    let ids = Tensor::arange(0u32, vocab.len() as u32, &Device::Cpu)?.unsqueeze(0)?;
    let rows = model.embed_tokens(&ids)?.squeeze(0)?.to_dtype(DType::F64)?.to_vec2::<f64>()?;
    let table: HashMap<String, Vec<f64>> = rows
        .into_iter()
        .enumerate()
        .map(|(i, v)| (vocab.token(i as u32).to_string(), v))
        .collect();
    Ok(EmbeddingTableScorer::new(table))
}

enum Strategy<'a> {
    Greedy,
    Sample { cfg: &'a DecodeConfig, rng: ChaCha8Rng },
}

/// Autoregressive decoding of `rows` continuations of one encoded source.
fn decode_rows(
    model: &TinySeq2Seq,
    hidden: &Tensor,
    mask: &Tensor,
    rows: usize,
    max_tokens: usize,
    mut strategy: Strategy<'_>,
) -> Result<Vec<Vec<u32>>, DecodeError> {
    let hidden = hidden.repeat((rows, 1, 1))?;
    let mask = mask.repeat((rows, 1))?;
    let mut seqs: Vec<Vec<u32>> = vec![vec![BOS]; rows];
    let mut done = vec![false; rows];
    let limit = max_tokens.min(model.config().max_positions - 1);
    for _ in 0..limit {
        let len = seqs[0].len();
        let flat: Vec<u32> = seqs.iter().flatten().copied().collect();
        let ids = Tensor::from_vec(flat, (rows, len), hidden.device())?;
        let logits = model
            .decode(&hidden, &mask, &ids)?
            .narrow(1, len - 1, 1)?
            .squeeze(1)?
            .to_dtype(DType::F64)?
            .to_vec2::<f64>()?;
        for (r, mut row) in logits.into_iter().enumerate() {
            if done[r] {
                seqs[r].push(PAD);
                continue;
            }
            for banned in [PAD, UNK, BOS] {
                row[banned as usize] = f64::NEG_INFINITY;
            }
            let next = match &mut strategy {
                Strategy::Greedy => argmax_first(&row).expect("non-empty vocabulary"),
                Strategy::Sample { cfg, rng } => temperature_sample(&row, cfg.tau_decode, cfg.top_k, rng)?,
            } as u32;
            seqs[r].push(next);
            if next == EOS {
                done[r] = true;
            }
        }
        if done.iter().all(|&d| d) {
            break;
        }
    }
    Ok(seqs.into_iter().map(|s| s[1..].to_vec()).collect())
}

/// Candidates and the chosen output for every record.
///
/// With crowd decoding enabled in the checkpoint's ablation mode, samples
/// `num_candidates` outputs per source and picks one by crowd selection;
/// otherwise decodes a single greedy output.
pub fn generate(
    checkpoint: &Checkpoint,
    records: &[EtdRecord],
    cfg: &DecodeConfig,
) -> Result<Vec<(CandidatePool, EvalTriple)>, DecodeError> {
    cfg.validate()?;
    let device = Device::Cpu;
    let meta = &checkpoint.meta;
    let mode = meta.train.ablation_mode;
    let preparer = SamplePreparer::new(&checkpoint.vocab, &meta.train, &meta.loss);
    let scorer = if mode.uses_crowd_decoding() {
        Some(embedding_scorer(&checkpoint.model, &checkpoint.vocab)?)
    } else {
        None
    };
    let mut out = Vec::with_capacity(records.len());
    for record in records {
        let sample = preparer.prepare(record);
        let enc = encode_batch(&checkpoint.model, &checkpoint.head, &[&sample], mode, &device)
            .map_err(|e| DecodeError::Config(e.to_string()))?;
        let pool = match &scorer {
            Some(scorer) => {
                let rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &record.identifier_uri));
                let seqs = decode_rows(
                    &checkpoint.model,
                    &enc.hidden,
                    &enc.mask,
                    cfg.num_candidates,
                    cfg.max_output_tokens,
                    Strategy::Sample { cfg, rng },
                )?;
                let texts: Vec<String> = seqs.iter().map(|s| checkpoint.vocab.decode(s)).collect();
                let tokens: Vec<Vec<String>> = texts
                    .iter()
                    .map(|t| t.split_whitespace().map(str::to_string).collect())
                    .collect();
                let sel = crowd_select(&tokens, cfg.gamma, scorer)?;
                CandidatePool {
                    source_id: record.identifier_uri.clone(),
                    candidates: texts,
                    crowd_scores: sel.scores,
                    chosen_index: sel.chosen_index,
                }
            }
            None => {
                let seqs = decode_rows(
                    &checkpoint.model,
                    &enc.hidden,
                    &enc.mask,
                    1,
                    cfg.max_output_tokens,
                    Strategy::Greedy,
                )?;
                CandidatePool {
                    source_id: record.identifier_uri.clone(),
                    candidates: vec![checkpoint.vocab.decode(&seqs[0])],
                    crowd_scores: vec![0.0],
                    chosen_index: 0,
                }
            }
        };
        let triple = EvalTriple {
            source: record.abstract_text.clone(),
            reference: record.abstract_general.clone(),
            hypothesis: pool.chosen().to_string(),
            college: record.college,
        };
        tracing::debug!(id = %record.identifier_uri, chosen = pool.chosen_index, "generated");
        out.push((pool, triple));
    }
    Ok(out)
}

pub fn write_jsonl<W: Write, T: Serialize>(mut out: W, items: &[T]) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

