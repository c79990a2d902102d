use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use candle_core::{DType, Device, Tensor};
use candle_nn::optim::{AdamW, Optimizer, ParamsAdamW};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{College, EtdRecord};
use crate::encoder::{EncoderConfig, PromptEncoder};
use crate::model::{Seq2SeqBackbone, Seq2SeqConfig, TinySeq2Seq, Vocab, BOS, EOS, PAD};

use super::assemble::{assemble_input, pad_batch, ModelInput};
use super::checkpoint::{save_checkpoint, CheckpointMeta, CHECKPOINT_SCHEMA};
use super::config::{AblationMode, LossConfig, TrainConfig};
use super::data::{build_vocab, PreparedSample, SamplePreparer};
use super::loss::{ce_loss_tensor, info_nce_tensor};
use super::TrainError;

const DTYPE: DType = DType::F32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogEntry {
    pub step: usize,
    pub epoch: usize,
    pub ce: f64,
    pub nce: f64,
    pub hybrid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationEntry {
    pub epoch: usize,
    pub ce: f64,
}

/// Encoded batch: encoder states, their mask and the soft keyword block.
pub struct Encoded {
    pub hidden: Tensor,
    pub mask: Tensor,
    pub soft: Option<Tensor>,
}

/// Embeds and encodes `prompt ⊕ [r^pos] ⊕ source` for a batch.
pub fn encode_batch(
    model: &dyn Seq2SeqBackbone,
    head: &PromptEncoder,
    batch: &[&PreparedSample],
    mode: AblationMode,
    device: &Device,
) -> Result<Encoded, TrainError> {
    let prompts: Vec<&[u32]> = batch.iter().map(|s| s.prompt_ids.as_slice()).collect();
    let sources: Vec<&[u32]> = batch.iter().map(|s| s.source_ids.as_slice()).collect();
    let (p_ids, p_mask) = pad_batch(&prompts, PAD, DTYPE, device)?;
    let (x_ids, x_mask) = pad_batch(&sources, PAD, DTYPE, device)?;
    let p_emb = model.embed_tokens(&p_ids)?;
    let x_emb = model.embed_tokens(&x_ids)?;
    let soft = if mode.uses_soft_prompt() {
        let kws: Vec<Vec<u32>> = batch.iter().map(|s| s.keyword_ids.clone()).collect();
        Some(head.encode_batch(model, &kws)?)
    } else {
        None
    };
    let ModelInput { embeds, mask } = assemble_input(
        (&p_emb, &p_mask),
        soft.as_ref().map(|(r, m)| (r, m)),
        (&x_emb, &x_mask),
    )?;
    let hidden = model.encode(&embeds, &mask)?;
    Ok(Encoded { hidden, mask, soft: soft.map(|(r, _)| r) })
}

/// Mean InfoNCE over rows that have subject terms and negatives, or `None`.
fn contrastive_term(
    model: &dyn Seq2SeqBackbone,
    head: &PromptEncoder,
    batch: &[&PreparedSample],
    r_pos: &Tensor,
    tau: f64,
    device: &Device,
) -> Result<Option<Tensor>, TrainError> {
    let rows: Vec<usize> = (0..batch.len())
        .filter(|&i| !batch[i].subject_ids.is_empty() && !batch[i].negative_ids.is_empty())
        .collect();
    if rows.is_empty() {
        return Ok(None);
    }
    let (_, n, d) = r_pos.dims3()?;
    let f = n * d;
    let keys: Vec<Vec<u32>> = rows.iter().map(|&i| batch[i].subject_ids.clone()).collect();
    let (r_key, _) = head.encode_batch(model, &keys)?;
    let r_key = r_key.reshape((rows.len(), f))?;
    let idx = Tensor::from_vec(rows.iter().map(|&i| i as u32).collect::<Vec<_>>(), rows.len(), device)?;
    let pos = r_pos.index_select(&idx, 0)?.reshape((rows.len(), f))?;

    let negs: Vec<Vec<u32>> = rows.iter().flat_map(|&i| batch[i].negative_ids.clone()).collect();
    let (r_neg, _) = head.encode_batch(model, &negs)?;
    let r_neg = r_neg.reshape((negs.len(), f))?;
    let zero = Tensor::zeros((1, f), r_neg.dtype(), device)?;
    let table = Tensor::cat(&[&r_neg, &zero], 0)?;
    let k_max = rows.iter().map(|&i| batch[i].negative_ids.len()).max().unwrap_or(1);
    let mut gather = Vec::with_capacity(rows.len() * k_max);
    let mut keep = Vec::with_capacity(rows.len() * k_max);
    let mut offset = 0u32;
    for &i in &rows {
        let k = batch[i].negative_ids.len();
        for j in 0..k_max {
            if j < k {
                gather.push(offset + j as u32);
                keep.push(1f32);
            } else {
                gather.push(negs.len() as u32);
                keep.push(0f32);
            }
        }
        offset += k as u32;
    }
    let gather = Tensor::from_vec(gather, rows.len() * k_max, device)?;
    let negatives = table.index_select(&gather, 0)?.reshape((rows.len(), k_max, f))?;
    let keep = Tensor::from_vec(keep, (rows.len(), k_max), device)?.to_dtype(r_neg.dtype())?;
    Ok(Some(info_nce_tensor(&r_key, &pos, &negatives, &keep, tau)?))
}

/// Teacher-forced decoder inputs `<s> y`, targets `y </s>` and the target mask.
pub fn decoder_tensors(batch: &[&PreparedSample], device: &Device) -> Result<(Tensor, Tensor, Tensor), TrainError> {
    let inputs: Vec<Vec<u32>> = batch
        .iter()
        .map(|s| std::iter::once(BOS).chain(s.target_ids.iter().copied()).collect())
        .collect();
    let targets: Vec<Vec<u32>> = batch
        .iter()
        .map(|s| s.target_ids.iter().copied().chain(std::iter::once(EOS)).collect())
        .collect();
    let (dec_in, _) = pad_batch(&inputs.iter().map(Vec::as_slice).collect::<Vec<_>>(), PAD, DTYPE, device)?;
    let (tgt, mask) = pad_batch(&targets.iter().map(Vec::as_slice).collect::<Vec<_>>(), PAD, DTYPE, device)?;
    Ok((dec_in, tgt, mask))
}

pub struct StepLosses {
    pub loss: Tensor,
    pub ce: f64,
    pub nce: f64,
    pub hybrid: f64,
}

/// Loss for one batch. Without the contrastive component (or when no row
/// in the batch has subject terms) the objective is plain cross-entropy.
pub fn batch_losses(
    model: &dyn Seq2SeqBackbone,
    head: &PromptEncoder,
    batch: &[&PreparedSample],
    mode: AblationMode,
    loss_cfg: &LossConfig,
    device: &Device,
) -> Result<StepLosses, TrainError> {
    let enc = encode_batch(model, head, batch, mode, device)?;
    let (dec_in, tgt, tgt_mask) = decoder_tensors(batch, device)?;
    let logits = model.decode(&enc.hidden, &enc.mask, &dec_in)?;
    let ce = ce_loss_tensor(&logits, &tgt, &tgt_mask)?;
    let ce_v = ce.to_dtype(DType::F64)?.to_scalar::<f64>()?;
    let nce = match (&enc.soft, mode.uses_contrastive()) {
        (Some(r_pos), true) => contrastive_term(model, head, batch, r_pos, loss_cfg.tau_nce, device)?,
        _ => None,
    };
    match nce {
        Some(nce) => {
            let nce_v = nce.to_dtype(DType::F64)?.to_scalar::<f64>()?;
            let lambda = loss_cfg.lambda;
            let loss = ((ce * (1.0 - lambda))? + (nce * lambda)?)?;
            let hybrid = (1.0 - lambda) * ce_v + lambda * nce_v;
            Ok(StepLosses { loss, ce: ce_v, nce: nce_v, hybrid })
        }
        None => Ok(StepLosses { loss: ce, ce: ce_v, nce: 0.0, hybrid: ce_v }),
    }
}

/// Splits off a validation slice of Engineering rows by identifier.
pub fn hold_out_validation(records: &[EtdRecord], fraction: f64, seed: u64) -> (Vec<EtdRecord>, Vec<EtdRecord>) {
    let mut eng: Vec<&str> = records
        .iter()
        .filter(|r| r.college == Some(College::Engineering))
        .map(|r| r.identifier_uri.as_str())
        .collect();
    eng.sort_unstable();
    eng.dedup();
    let n_val = if fraction > 0.0 && eng.len() >= 2 {
        ((fraction * eng.len() as f64).round() as usize).clamp(1, eng.len() - 1)
    } else {
        0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    eng.shuffle(&mut rng);
    let held: HashSet<&str> = eng.into_iter().take(n_val).collect();
    let (val, train): (Vec<EtdRecord>, Vec<EtdRecord>) =
        records.iter().cloned().partition(|r| held.contains(r.identifier_uri.as_str()));
    (train, val)
}

pub struct TrainOutcome {
    pub model: TinySeq2Seq,
    pub head: PromptEncoder,
    pub vocab: Vocab,
    pub log: Vec<TrainLogEntry>,
    pub validation: Vec<ValidationEntry>,
    pub checkpoints: Vec<PathBuf>,
}

fn append_jsonl<T: Serialize>(path: &Path, value: &T) -> Result<(), TrainError> {
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| TrainError::Checkpoint(e.to_string()))?;
    let line = serde_json::to_string(value).map_err(|e| TrainError::Checkpoint(e.to_string()))?;
    writeln!(f, "{line}").map_err(|e| TrainError::Checkpoint(e.to_string()))
}

fn validation_ce(
    model: &TinySeq2Seq,
    head: &PromptEncoder,
    samples: &[PreparedSample],
    cfg: &TrainConfig,
    device: &Device,
) -> Result<f64, TrainError> {
    let (mut total, mut count) = (0.0, 0usize);
    for chunk in samples.chunks(cfg.batch_size) {
        let batch: Vec<&PreparedSample> = chunk.iter().collect();
        let enc = encode_batch(model, head, &batch, cfg.ablation_mode, device)?;
        let (dec_in, tgt, mask) = decoder_tensors(&batch, device)?;
        let logits = model.decode(&enc.hidden, &enc.mask, &dec_in)?;
        let tokens = mask.sum_all()?.to_dtype(DType::F64)?.to_scalar::<f64>()?;
        let ce = ce_loss_tensor(&logits, &tgt, &mask)?.to_dtype(DType::F64)?.to_scalar::<f64>()?;
        total += ce * tokens;
        count += tokens as usize;
    }
    Ok(if count == 0 { 0.0 } else { total / count as f64 })
}

/// Fine-tunes a fresh backbone and prompt head on `records`.
///
/// With a run directory, writes `train_log.jsonl`,
/// `validation.jsonl` and `checkpoints/epoch-N/`. A non-finite loss aborts
/// with the last checkpoint written so far.
pub fn train(
    records: &[EtdRecord],
    cfg: &TrainConfig,
    loss_cfg: &LossConfig,
    run_dir: Option<&Path>,
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    loss_cfg.validate()?;
    if records.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let device = Device::Cpu;
    let (train_rows, val_rows) = hold_out_validation(records, cfg.validation_fraction, cfg.seed);
    let vocab = build_vocab(&train_rows, cfg.model.max_vocab);
    let preparer = SamplePreparer::new(&vocab, cfg, loss_cfg);
    let samples: Vec<PreparedSample> = train_rows.iter().map(|r| preparer.prepare(r)).collect();
    let val_samples: Vec<PreparedSample> = val_rows.iter().map(|r| preparer.prepare(r)).collect();
    tracing::info!(train = samples.len(), validation = val_samples.len(), vocab = vocab.len(), "prepared samples");

    let model_cfg = Seq2SeqConfig {
        vocab_size: vocab.len(),
        d_model: cfg.model.d_model,
        num_heads: cfg.model.num_heads,
        ffn_dim: cfg.model.ffn_dim,
        num_layers: cfg.model.num_layers,
        max_positions: cfg.max_input_len().max(cfg.max_target_len + 1),
    };
    let model = TinySeq2Seq::new(model_cfg.clone(), cfg.seed, DTYPE, &device)?;
    let head = PromptEncoder::new(
        EncoderConfig { hidden_dim: cfg.model.d_model, keyword_len: cfg.keyword_len },
        cfg.seed.wrapping_add(1),
        DTYPE,
        &device,
    )?;
    let mut vars = model.trainable_vars();
    if cfg.ablation_mode.uses_soft_prompt() {
        vars.extend(head.store().vars());
    }
    let mut opt = AdamW::new(
        vars,
        ParamsAdamW { lr: cfg.learning_rate, weight_decay: cfg.weight_decay, ..Default::default() },
    )?;

    if let Some(dir) = run_dir {
        std::fs::create_dir_all(dir.join("checkpoints")).map_err(|e| TrainError::Checkpoint(e.to_string()))?;
        for f in ["train_log.jsonl", "validation.jsonl"] {
            let _ = std::fs::remove_file(dir.join(f));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut log = Vec::new();
    let mut validation = Vec::new();
    let mut checkpoints: Vec<PathBuf> = Vec::new();
    let mut step = 0usize;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    for epoch in 1..=cfg.epochs {
        if cfg.max_steps.is_some_and(|m| step >= m) {
            break;
        }
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            if cfg.max_steps.is_some_and(|m| step >= m) {
                break;
            }
            let batch: Vec<&PreparedSample> = chunk.iter().map(|&i| &samples[i]).collect();
            let out = batch_losses(&model, &head, &batch, cfg.ablation_mode, loss_cfg, &device)?;
            step += 1;
            if !out.hybrid.is_finite() {
                tracing::error!(step, "loss diverged");
                return Err(TrainError::Diverged { step, last_checkpoint: checkpoints.last().cloned() });
            }
            opt.backward_step(&out.loss)?;
            let entry = TrainLogEntry { step, epoch, ce: out.ce, nce: out.nce, hybrid: out.hybrid };
            tracing::debug!(step, ce = out.ce, nce = out.nce, hybrid = out.hybrid, "step");
            if let Some(dir) = run_dir {
                append_jsonl(&dir.join("train_log.jsonl"), &entry)?;
            }
            log.push(entry);
        }
        if !val_samples.is_empty() {
            let ce = validation_ce(&model, &head, &val_samples, cfg, &device)?;
            tracing::info!(epoch, ce, "validation");
            let v = ValidationEntry { epoch, ce };
            if let Some(dir) = run_dir {
                append_jsonl(&dir.join("validation.jsonl"), &v)?;
            }
            validation.push(v);
        }
        if let Some(dir) = run_dir {
            let path = dir.join("checkpoints").join(format!("epoch-{epoch}"));
            let meta = CheckpointMeta {
                schema: CHECKPOINT_SCHEMA.into(),
                epoch,
                step,
                model: model_cfg.clone(),
                train: cfg.clone(),
                loss: loss_cfg.clone(),
            };
            save_checkpoint(&path, &model, &head, &vocab, &meta)?;
            checkpoints.push(path);
        }
    }
    Ok(TrainOutcome { model, head, vocab, log, validation, checkpoints })
}

/// Trailing moving averages of `values` over `window` entries.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || values.len() < window {
        return Vec::new();
    }
    values.windows(window).map(|w| w.iter().sum::<f64>() / window as f64).collect()
}
