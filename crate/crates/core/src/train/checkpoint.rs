use std::path::Path;

use candle_core::{DType, Device};
use serde::{Deserialize, Serialize};

use crate::encoder::PromptEncoder;
use crate::model::{Seq2SeqConfig, TinySeq2Seq, Vocab};

use super::config::{LossConfig, TrainConfig};
use super::TrainError;

pub const CHECKPOINT_SCHEMA: &str = "agp-checkpoint/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub schema: String,
    pub epoch: usize,
    pub step: usize,
    pub model: Seq2SeqConfig,
    pub train: TrainConfig,
    pub loss: LossConfig,
}

/// Backbone, prompt head and vocabulary restored from disk.
pub struct Checkpoint {
    pub model: TinySeq2Seq,
    pub head: PromptEncoder,
    pub vocab: Vocab,
    pub meta: CheckpointMeta,
}

fn io(e: impl std::fmt::Display) -> TrainError {
    TrainError::Checkpoint(e.to_string())
}

pub fn save_checkpoint(
    dir: &Path,
    model: &TinySeq2Seq,
    head: &PromptEncoder,
    vocab: &Vocab,
    meta: &CheckpointMeta,
) -> Result<(), TrainError> {
    std::fs::create_dir_all(dir).map_err(io)?;
    model.store().save(&dir.join("backbone.safetensors"))?;
    head.save(dir)?;
    vocab.save(&dir.join("vocab.json")).map_err(io)?;
    std::fs::write(dir.join("checkpoint.json"), serde_json::to_vec_pretty(meta).map_err(io)?).map_err(io)?;
    Ok(())
}

pub fn load_checkpoint(dir: &Path, device: &Device) -> Result<Checkpoint, TrainError> {
    let raw = std::fs::read(dir.join("checkpoint.json")).map_err(io)?;
    let meta: CheckpointMeta = serde_json::from_slice(&raw).map_err(io)?;
    if meta.schema != CHECKPOINT_SCHEMA {
        return Err(TrainError::Checkpoint(format!("unsupported checkpoint schema {}", meta.schema)));
    }
    let vocab = Vocab::load(&dir.join("vocab.json")).map_err(io)?;
    let mut model = TinySeq2Seq::new(meta.model.clone(), 0, DType::F32, device)?;
    model.store_mut().load(&dir.join("backbone.safetensors"))?;
    let head = PromptEncoder::load(dir, DType::F32, device)?;
    Ok(Checkpoint { model, head, vocab, meta })
}
