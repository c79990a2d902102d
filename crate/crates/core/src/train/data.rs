//! Per-document model inputs: prompt, keyword and source token ids.

use sha2::{Digest, Sha256};

use crate::corpus::EtdRecord;
use crate::model::{Vocab, UNK};
use crate::prompt::{build_prompt, extract_keywords, sample_negatives, BagOfWordsEmbedder, PromptTemplate, STATIC_PROMPT};
use crate::text;

use super::config::{AblationMode, LossConfig, TrainConfig};

/// Stable 64-bit mix of a seed and an identifier.
pub fn derive_seed(seed: u64, id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(id.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSample {
    pub source_id: String,
    /// Hard prompt tokens (static, dynamic with keywords, or the bare prefix
    /// when keywords enter as soft representations).
    pub prompt_ids: Vec<u32>,
    /// Positive keyword tokens for the soft prompt; empty when unused.
    pub keyword_ids: Vec<u32>,
    /// Subject-term tokens; empty when the record has none.
    pub subject_ids: Vec<u32>,
    /// One token sequence per negative word.
    pub negative_ids: Vec<Vec<u32>>,
    pub source_ids: Vec<u32>,
    pub target_ids: Vec<u32>,
    pub keywords: Vec<String>,
}

/// Shared state for turning records into [`PreparedSample`]s.
pub struct SamplePreparer<'a> {
    pub vocab: &'a Vocab,
    pub embedder: BagOfWordsEmbedder,
    pub template: PromptTemplate,
    pub train: &'a TrainConfig,
    pub loss: &'a LossConfig,
}

impl<'a> SamplePreparer<'a> {
    pub fn new(vocab: &'a Vocab, train: &'a TrainConfig, loss: &'a LossConfig) -> Self {
        let words = (0..vocab.len() as u32).map(|i| vocab.token(i).to_string()).skip(4);
        Self {
            vocab,
            embedder: BagOfWordsEmbedder::new(words),
            template: PromptTemplate {
                max_prompt_tokens: train.prompt_len,
                max_keyword_tokens: train.keyword_len,
                ..PromptTemplate::default()
            },
            train,
            loss,
        }
    }

    fn ids(&self, s: &str, limit: usize) -> Vec<u32> {
        let mut ids = self.vocab.encode(s);
        ids.truncate(limit);
        ids
    }

    pub fn prepare(&self, record: &EtdRecord) -> PreparedSample {
        let mode = self.train.ablation_mode;
        let m = record.subject_terms.len();
        let k = if m > 0 { m } else { self.train.default_keyword_count };
        let keywords: Vec<String> = if mode.uses_keywords() {
            extract_keywords(&record.abstract_text, &self.embedder, k)
                .into_iter()
                .map(|kw| kw.phrase)
                .collect()
        } else {
            Vec::new()
        };

        let prompt_ids = match mode {
            AblationMode::FinetuneOnly => self.ids(STATIC_PROMPT, self.train.prompt_len),
            AblationMode::Dynamic => self.ids(
                &build_prompt(&self.template, &keywords),
                self.train.prompt_len + self.train.keyword_len,
            ),
            _ if keywords.is_empty() => self.ids(STATIC_PROMPT, self.train.prompt_len),
            _ => self.ids(&self.template.prefix_text, self.train.prompt_len),
        };

        let joined = |phrases: &[String]| {
            self.template.fit_keywords(phrases).join(&self.template.separator)
        };
        let keyword_ids = if mode.uses_soft_prompt() {
            let ids = self.ids(&joined(&keywords), self.train.keyword_len);
            // A document with no content words still occupies the soft slot.
            if ids.is_empty() { vec![UNK] } else { ids }
        } else {
            Vec::new()
        };

        let (subject_ids, negative_ids) = if mode.uses_contrastive() && m > 0 {
            let subjects = self.ids(&joined(&record.subject_terms), self.train.keyword_len);
            let n_neg = self.loss.negatives_count.unwrap_or(keywords.len().max(1));
            let tokens = text::word_tokens(&record.abstract_text);
            let negs = sample_negatives(
                &tokens,
                &keywords,
                n_neg,
                derive_seed(self.train.seed, &record.identifier_uri),
            );
            let neg_ids = negs
                .iter()
                .map(|w| self.ids(w, self.train.keyword_len))
                .filter(|ids| !ids.is_empty())
                .collect();
            (subjects, neg_ids)
        } else {
            (Vec::new(), Vec::new())
        };

        let mut source_ids = self.vocab.encode(&record.abstract_text);
        if source_ids.len() > self.train.max_source_len {
            tracing::warn!(id = %record.identifier_uri, len = source_ids.len(), "source truncated");
            source_ids.truncate(self.train.max_source_len);
        }
        let mut target_ids = self.vocab.encode(&record.abstract_general);
        if target_ids.len() > self.train.max_target_len {
            tracing::warn!(id = %record.identifier_uri, len = target_ids.len(), "target truncated");
            target_ids.truncate(self.train.max_target_len);
        }

        PreparedSample {
            source_id: record.identifier_uri.clone(),
            prompt_ids,
            keyword_ids,
            subject_ids,
            negative_ids,
            source_ids,
            target_ids,
            keywords,
        }
    }
}

/// Word vocabulary over sources, targets, subject terms and both prompt texts.
pub fn build_vocab(records: &[EtdRecord], max_size: usize) -> Vocab {
    let mut texts: Vec<&str> = vec![crate::prompt::DYNAMIC_PREFIX, STATIC_PROMPT, ","];
    for r in records {
        texts.push(&r.abstract_text);
        texts.push(&r.abstract_general);
        texts.extend(r.subject_terms.iter().map(String::as_str));
    }
    Vocab::build(texts, max_size)
}
