//! Per-college metric tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::stats::mtld::mtld;
use crate::stats::readability::{flesch_reading_ease, TextCounts};
use crate::text;

use super::adapters::AdapterRegistry;
use super::bleu::{bleu, BleuMode};
use super::ltcr::ltcr;
use super::meteor::meteor;
use super::rouge::rouge_n;
use super::sari::sari;
use super::{EvalError, EvalTriple};

pub const OVERALL: &str = "All";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub count: usize,
    pub s_bleu: f64,
    pub d_bleu: f64,
    pub rouge1: f64,
    pub rouge2: f64,
    pub meteor: f64,
    pub sari: f64,
    /// Mean over hypotheses with at least one sentence.
    pub fres: Option<f64>,
    pub ltcr: Option<f64>,
    /// Mean over hypotheses with a defined value.
    pub mtld: Option<f64>,
    pub bertscore_f1: Option<f64>,
    pub blonde_f1: Option<f64>,
    pub comet: Option<f64>,
    pub toxicity: Option<f64>,
}

/// Metric variants used, so that numbers can be compared honestly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub triples: usize,
    pub bleu: String,
    pub rouge: String,
    pub meteor: String,
    pub sari: String,
    pub ltcr: String,
    pub adapters: BTreeMap<String, String>,
}

impl ReportMetadata {
    fn new(triples: usize, adapters: BTreeMap<String, String>) -> Self {
        Self {
            triples,
            bleu: "4-gram, uniform weights; sentence mode pairs by index with add-one smoothing above unigrams; document mode unsmoothed".into(),
            rouge: "n-gram F1, no stemming".into(),
            meteor: "exact then Porter-stem unigram matching, alpha 0.9 beta 3 gamma 0.5, no synonyms".into(),
            sari: "single reference, n=1..4, keep F1 + deletion precision + addition F1".into(),
            ltcr: "terms repeated in >=2 sources; rendering is the exact term or the closest hypothesis token by character similarity".into(),
            adapters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metadata: ReportMetadata,
    pub rows: BTreeMap<String, MetricRow>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

pub fn fres(text_in: &str) -> Result<f64, crate::stats::StatsError> {
    TextCounts::of(text_in).map(|c| flesch_reading_ease(&c))
}

pub fn metric_row(triples: &[EvalTriple], adapters: &AdapterRegistry) -> MetricRow {
    let per = |f: &dyn Fn(&EvalTriple) -> f64| mean(triples.iter().map(f)).unwrap_or(0.0);
    MetricRow {
        count: triples.len(),
        s_bleu: per(&|t| bleu(&t.hypothesis, &t.reference, BleuMode::Sentence)),
        d_bleu: per(&|t| bleu(&t.hypothesis, &t.reference, BleuMode::Document)),
        rouge1: per(&|t| rouge_n(&t.hypothesis, &t.reference, 1)),
        rouge2: per(&|t| rouge_n(&t.hypothesis, &t.reference, 2)),
        meteor: per(&|t| meteor(&t.hypothesis, &t.reference)),
        sari: per(&|t| sari(&t.source, &t.hypothesis, &t.reference)),
        fres: mean(triples.iter().filter_map(|t| fres(&t.hypothesis).ok())),
        ltcr: ltcr(triples),
        mtld: mean(triples.iter().filter_map(|t| mtld(&text::word_tokens(&t.hypothesis)).value)),
        bertscore_f1: adapters.adapter_score("bertscore", triples),
        blonde_f1: adapters.adapter_score("blonde", triples),
        comet: adapters.adapter_score("comet", triples),
        toxicity: adapters.adapter_score("toxicity", triples),
    }
}

/// Metrics per college plus an overall row. Triples without a college count only overall.
pub fn report(triples: &[EvalTriple], adapters: &AdapterRegistry) -> Result<MetricReport, EvalError> {
    if triples.is_empty() {
        return Err(EvalError::Empty);
    }
    for (i, t) in triples.iter().enumerate() {
        t.validate().map_err(|field| EvalError::InvalidTriple { index: i, field })?;
    }
    let mut groups: BTreeMap<String, Vec<EvalTriple>> = BTreeMap::new();
    for t in triples {
        if let Some(c) = t.college {
            groups.entry(c.code().to_string()).or_default().push(t.clone());
        }
    }
    let mut rows: BTreeMap<String, MetricRow> =
        groups.iter().map(|(k, ts)| (k.clone(), metric_row(ts, adapters))).collect();
    rows.insert(OVERALL.to_string(), metric_row(triples, adapters));
    Ok(MetricReport { metadata: ReportMetadata::new(triples.len(), adapters.versions()), rows })
}

pub const CSV_HEADER: [&str; 15] = [
    "college", "count", "s_bleu", "d_bleu", "rouge1", "rouge2", "meteor", "sari", "fres", "ltcr", "mtld",
    "bertscore_f1", "blonde_f1", "comet", "toxicity",
];

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

pub fn write_report_csv<W: std::io::Write>(report: &MetricReport, out: W) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for (college, r) in &report.rows {
        w.write_record([
            college.clone(),
            r.count.to_string(),
            cell(Some(r.s_bleu)),
            cell(Some(r.d_bleu)),
            cell(Some(r.rouge1)),
            cell(Some(r.rouge2)),
            cell(Some(r.meteor)),
            cell(Some(r.sari)),
            cell(r.fres),
            cell(r.ltcr),
            cell(r.mtld),
            cell(r.bertscore_f1),
            cell(r.blonde_f1),
            cell(r.comet),
            cell(r.toxicity),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `report.json` and `report.csv` into `dir`.
pub fn write_report(report: &MetricReport, dir: &Path) -> Result<(), EvalError> {
    fs::create_dir_all(dir)?;
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    fs::write(dir.join("report.json"), json)?;
    write_report_csv(report, fs::File::create(dir.join("report.csv"))?)
}
