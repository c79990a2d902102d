use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TrainError;

/// Which model components are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    /// Fixed instruction prompt, plain fine-tuning.
    FinetuneOnly,
    /// Hard-text dynamic keyword prompt.
    Dynamic,
    /// Dynamic prompt with soft keyword representations.
    DynSoft,
    /// Soft prompt plus the contrastive objective.
    DynSoftCon,
    /// Everything, including crowd decoding at generation time.
    All,
}

impl AblationMode {
    pub const ALL_MODES: [AblationMode; 5] = [
        AblationMode::FinetuneOnly,
        AblationMode::Dynamic,
        AblationMode::DynSoft,
        AblationMode::DynSoftCon,
        AblationMode::All,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AblationMode::FinetuneOnly => "finetune_only",
            AblationMode::Dynamic => "dynamic",
            AblationMode::DynSoft => "dyn_soft",
            AblationMode::DynSoftCon => "dyn_soft_con",
            AblationMode::All => "all",
        }
    }

    pub fn uses_soft_prompt(self) -> bool {
        matches!(self, AblationMode::DynSoft | AblationMode::DynSoftCon | AblationMode::All)
    }

    pub fn uses_contrastive(self) -> bool {
        matches!(self, AblationMode::DynSoftCon | AblationMode::All)
    }

    pub fn uses_crowd_decoding(self) -> bool {
        self == AblationMode::All
    }

    pub fn uses_keywords(self) -> bool {
        self != AblationMode::FinetuneOnly
    }
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AblationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AblationMode::ALL_MODES
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown ablation mode {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub lambda: f64,
    pub tau_nce: f64,
    /// Negatives per sample; `None` uses the sample's positive count.
    pub negatives_count: Option<usize>,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { lambda: 0.3, tau_nce: 0.1, negatives_count: None }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(TrainError::Config(format!("lambda must lie in [0, 1], got {}", self.lambda)));
        }
        if !(self.tau_nce > 0.0) {
            return Err(TrainError::Config(format!("tau_nce must be positive, got {}", self.tau_nce)));
        }
        Ok(())
    }
}

/// Size of the reference backbone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub max_vocab: usize,
    pub d_model: usize,
    pub num_heads: usize,
    pub ffn_dim: usize,
    pub num_layers: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { max_vocab: 8000, d_model: 32, num_heads: 2, ffn_dim: 64, num_layers: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_source_len: usize,
    pub prompt_len: usize,
    pub keyword_len: usize,
    pub max_target_len: usize,
    pub epochs: usize,
    /// Stop after this many optimizer steps, if set.
    pub max_steps: Option<usize>,
    pub seed: u64,
    pub optimizer: String,
    pub weight_decay: f64,
    pub ablation_mode: AblationMode,
    /// Keyword count for documents without subject terms.
    pub default_keyword_count: usize,
    /// Share of Engineering training rows held out for validation.
    pub validation_fraction: f64,
    pub model: ModelConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 5e-5,
            batch_size: 4,
            max_source_len: 512,
            prompt_len: 16,
            keyword_len: 16,
            max_target_len: 512,
            epochs: 3,
            max_steps: None,
            seed: 42,
            optimizer: "adamw".into(),
            weight_decay: 0.01,
            ablation_mode: AblationMode::All,
            default_keyword_count: 5,
            validation_fraction: 0.1,
            model: ModelConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::Config(m));
        if !(self.learning_rate > 0.0) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if self.batch_size == 0 || self.prompt_len == 0 || self.keyword_len == 0 {
            return bad("batch size, prompt length and keyword length must be positive".into());
        }
        if self.max_source_len == 0 || self.max_target_len == 0 {
            return bad("sequence limits must be positive".into());
        }
        if self.optimizer != "adamw" {
            return bad(format!("unsupported optimizer {:?}", self.optimizer));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad(format!("validation fraction must lie in [0, 1), got {}", self.validation_fraction));
        }
        let m = &self.model;
        if m.d_model == 0 || m.num_heads == 0 || m.d_model % m.num_heads != 0 {
            return bad(format!("d_model {} must be a positive multiple of num_heads {}", m.d_model, m.num_heads));
        }
        Ok(())
    }

    /// Encoder positions needed for the longest assembled input.
    pub fn max_input_len(&self) -> usize {
        self.prompt_len + 2 * self.keyword_len + self.max_source_len
    }
}
