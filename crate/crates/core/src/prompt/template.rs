use serde::{Deserialize, Serialize};

use crate::text;

/// Prefix of the dynamic keyword prompt.
pub const DYNAMIC_PREFIX: &str = "Generate the document by reducing the domain knowledge of ";

/// Fixed instruction used when no keywords are available, and by the
/// fine-tune-only baseline.
pub const STATIC_PROMPT: &str = "Generate another version of the provided document for general audiences.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub prefix_text: String,
    pub separator: String,
    pub max_prompt_tokens: usize,
    pub max_keyword_tokens: usize,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self {
            prefix_text: DYNAMIC_PREFIX.to_string(),
            separator: ", ".to_string(),
            max_prompt_tokens: 16,
            max_keyword_tokens: 16,
        }
    }
}

impl PromptTemplate {
    /// Leading keywords whose combined token count fits the keyword budget.
    pub fn fit_keywords<'a, S: AsRef<str>>(&self, keywords: &'a [S]) -> Vec<&'a str> {
        let mut used = 0;
        let mut kept = Vec::new();
        for k in keywords {
            let n = text::tokenize(k.as_ref()).len();
            if used + n > self.max_keyword_tokens {
                break;
            }
            used += n;
            kept.push(k.as_ref());
        }
        kept
    }

    /// The prefix followed by the separator-joined keywords; falls back to
    /// [`STATIC_PROMPT`] when no keyword fits.
    pub fn build<S: AsRef<str>>(&self, keywords: &[S]) -> String {
        let kept = self.fit_keywords(keywords);
        if kept.is_empty() {
            return STATIC_PROMPT.to_string();
        }
        format!("{}{}", self.prefix_text, kept.join(&self.separator))
    }
}

pub fn build_prompt<S: AsRef<str>>(template: &PromptTemplate, positives: &[S]) -> String {
    template.build(positives)
}
