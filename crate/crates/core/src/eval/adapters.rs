//! Pluggable scorers for metrics that need external models.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decode::alignment::{semantic_alignment, OneHotScorer, TokenScorer};
use crate::text;

use super::EvalTriple;

pub const ADAPTER_NAMES: [&str; 4] = ["bertscore", "blonde", "comet", "toxicity"];

/// A batch scorer returning one percentage per triple.
pub trait MetricAdapter: Send + Sync {
    fn name(&self) -> &str;
    fn version(&self) -> &str;
    fn score_batch(&self, triples: &[EvalTriple]) -> Result<Vec<f64>, String>;
}

/// Greedy token-matching F1 between hypothesis and reference, in percent.
pub struct ReferenceBertScore<S: TokenScorer = OneHotScorer> {
    scorer: S,
    version: String,
}

impl Default for ReferenceBertScore<OneHotScorer> {
    fn default() -> Self {
        Self { scorer: OneHotScorer, version: "onehot-1".into() }
    }
}

impl<S: TokenScorer> ReferenceBertScore<S> {
    pub fn with_scorer(scorer: S, version: impl Into<String>) -> Self {
        Self { scorer, version: version.into() }
    }
}

impl<S: TokenScorer + Send + Sync> MetricAdapter for ReferenceBertScore<S> {
    fn name(&self) -> &str {
        "bertscore"
    }

    fn version(&self) -> &str {
        &self.version
    }

    fn score_batch(&self, triples: &[EvalTriple]) -> Result<Vec<f64>, String> {
        triples
            .iter()
            .map(|t| {
                semantic_alignment(&text::tokenize(&t.hypothesis), &text::tokenize(&t.reference), &self.scorer)
                    .map(|f1| 100.0 * f1)
                    .map_err(|e| e.to_string())
            })
            .collect()
    }
}

/// Remote scorer. Sends `{"triples": [...]}` as JSON and expects `{"scores": [...]}`.
pub struct HttpAdapter {
    name: String,
    version: String,
    url: String,
    timeout: Duration,
}

#[derive(Serialize)]
struct HttpRequest<'a> {
    triples: &'a [EvalTriple],
}

#[derive(Deserialize)]
struct HttpResponse {
    scores: Vec<f64>,
}

impl HttpAdapter {
    pub fn new(name: impl Into<String>, version: impl Into<String>, url: impl Into<String>) -> Self {
        Self { name: name.into(), version: version.into(), url: url.into(), timeout: Duration::from_secs(120) }
    }

    /// Environment variable holding the endpoint for `name`, e.g. `AGP_COMET_URL`.
    pub fn env_var(name: &str) -> String {
        format!("AGP_{}_URL", name.to_uppercase())
    }

    /// Builds an adapter when its endpoint variable is set. There is no default endpoint.
    pub fn from_env(name: &str) -> Option<Self> {
        let url = std::env::var(Self::env_var(name)).ok().filter(|u| !u.trim().is_empty())?;
        let version = format!("http:{url}");
        Some(Self::new(name, version, url))
    }
}

impl MetricAdapter for HttpAdapter {
    fn name(&self) -> &str {
        &self.name
    }

    fn version(&self) -> &str {
        &self.version
    }

    fn score_batch(&self, triples: &[EvalTriple]) -> Result<Vec<f64>, String> {
        let body = serde_json::to_string(&HttpRequest { triples }).map_err(|e| e.to_string())?;
        let text = ureq::post(&self.url)
            .timeout(self.timeout)
            .set("Content-Type", "application/json")
            .send_string(&body)
            .map_err(|e| e.to_string())?
            .into_string()
            .map_err(|e| e.to_string())?;
        let resp: HttpResponse = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        if resp.scores.len() != triples.len() {
            return Err(format!("expected {} scores, got {}", triples.len(), resp.scores.len()));
        }
        if let Some(bad) = resp.scores.iter().find(|s| !s.is_finite()) {
            return Err(format!("non-finite score {bad}"));
        }
        Ok(resp.scores)
    }
}

type CacheKey = (String, String, String);

/// Registered adapters plus a per-triple score cache.
#[derive(Default)]
pub struct AdapterRegistry {
    adapters: BTreeMap<String, Box<dyn MetricAdapter>>,
    cache: Mutex<HashMap<CacheKey, f64>>,
}

pub fn triple_hash(t: &EvalTriple) -> String {
    let mut h = Sha256::new();
    for part in [&t.source, &t.reference, &t.hypothesis] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl AdapterRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry with every adapter whose endpoint variable is set.
    pub fn from_env() -> Self {
        let mut reg = Self::new();
        for name in ADAPTER_NAMES {
            if let Some(a) = HttpAdapter::from_env(name) {
                reg.register(Box::new(a));
            }
        }
        reg
    }

    pub fn register(&mut self, adapter: Box<dyn MetricAdapter>) {
        self.adapters.insert(adapter.name().to_string(), adapter);
    }

    pub fn versions(&self) -> BTreeMap<String, String> {
        self.adapters.iter().map(|(k, a)| (k.clone(), a.version().to_string())).collect()
    }

    /// Per-triple scores, or `None` when the adapter is missing or fails.
    pub fn scores(&self, name: &str, triples: &[EvalTriple]) -> Option<Vec<f64>> {
        let adapter = self.adapters.get(name)?;
        let version = adapter.version().to_string();
        let keys: Vec<CacheKey> =
            triples.iter().map(|t| (triple_hash(t), name.to_string(), version.clone())).collect();
        let mut cache = self.cache.lock().expect("cache lock");
        let missing: Vec<usize> = (0..triples.len()).filter(|&i| !cache.contains_key(&keys[i])).collect();
        if !missing.is_empty() {
            let batch: Vec<EvalTriple> = missing.iter().map(|&i| triples[i].clone()).collect();
            match adapter.score_batch(&batch) {
                Ok(scores) if scores.len() == batch.len() => {
                    for (&i, s) in missing.iter().zip(scores) {
                        cache.insert(keys[i].clone(), s);
                    }
                }
                Ok(scores) => {
                    tracing::error!(adapter = name, expected = batch.len(), got = scores.len(), "adapter returned wrong count");
                    return None;
                }
                Err(e) => {
                    tracing::error!(adapter = name, error = %e, "adapter failed");
                    return None;
                }
            }
        }
        Some(keys.iter().map(|k| cache[k]).collect())
    }

    /// Mean adapter score over `triples`, or `None`.
    pub fn adapter_score(&self, name: &str, triples: &[EvalTriple]) -> Option<f64> {
        if triples.is_empty() {
            return None;
        }
        let s = self.scores(name, triples)?;
        Some(s.iter().sum::<f64>() / s.len() as f64)
    }
}
