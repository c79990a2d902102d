//! Input assembly, losses and the fine-tuning loop.

pub mod assemble;
pub mod checkpoint;
pub mod config;
pub mod data;
pub mod loss;
pub mod trainer;

use std::path::PathBuf;

use thiserror::Error;

pub use assemble::{assemble_input, ModelInput};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointMeta};
pub use config::{AblationMode, LossConfig, ModelConfig, TrainConfig};
pub use data::{build_vocab, PreparedSample, SamplePreparer};
pub use loss::{ce_loss, hybrid_loss, info_nce, LossError};
pub use trainer::{train, TrainLogEntry, TrainOutcome};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("loss diverged at step {step}; last good checkpoint: {last_checkpoint:?}")]
    Diverged { step: usize, last_checkpoint: Option<PathBuf> },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Encoder(#[from] crate::encoder::EncoderError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Tensor(#[from] candle_core::Error),
}
