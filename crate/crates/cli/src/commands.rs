use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use agp_core::corpus::{self, default_roster, read_csv_file, write_csv_file, EtdRecord, HarvestConfig, Roster};
use agp_core::decode::generate::write_jsonl;
use agp_core::eval::report::{MetricRow, CSV_HEADER, OVERALL};
use agp_core::eval::{self, AdapterRegistry, EvalTriple, ReferenceBertScore};
use agp_core::stats::stats_report;
use agp_core::train::checkpoint::load_checkpoint;
use agp_core::train::{self as trainer, AblationMode};
use candle_core::Device;
use serde::Serialize;

use crate::config::RunConfig;
use crate::run_dir::{open_dir, open_file};
use crate::{AblateArgs, CliError, DecodeOverrides, EvaluateArgs, GenerateArgs, HarvestArgs, SplitArgs, StatsArgs, TrainArgs, TrainOverrides};

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

pub fn harvest(a: HarvestArgs, mut cfg: RunConfig) -> Result<(), CliError> {
    let h = &mut cfg.harvest;
    if let Some(p) = a.metadata_prefix {
        h.metadata_prefix = p;
    }
    if a.set_spec.is_some() {
        h.set_spec = a.set_spec;
    }
    if let Some(d) = a.delay_ms {
        h.delay_ms = d;
    }
    if let Some(r) = a.retries {
        h.retries = r;
    }
    if let Some(t) = a.threshold {
        h.college_threshold = t;
    }
    h.strict_resumption |= a.strict_resumption;
    let _lock = open_file(&a.out, "harvest", &cfg)?;
    let h = &cfg.harvest;

    let roster: Roster = match &a.roster {
        Some(p) => serde_json::from_reader(BufReader::new(File::open(p)?))?,
        None => default_roster(),
    };
    let mut oai = HarvestConfig::new(&a.endpoint, &h.metadata_prefix);
    oai.set_spec = h.set_spec.clone();
    oai.min_delay = Duration::from_millis(h.delay_ms);
    oai.retries = h.retries;
    oai.backoff = Duration::from_millis(h.backoff_ms);
    oai.timeout = Duration::from_secs(h.timeout_s);
    oai.strict_resumption = h.strict_resumption;

    let mut records = Vec::new();
    let mut rejected = 0usize;
    let mut it = corpus::harvest(oai);
    for raw in it.by_ref() {
        match corpus::parse_record(&raw?) {
            Ok(r) => records.push(r),
            Err(e) if e.is_rejection() => {
                rejected += 1;
                tracing::warn!(error = %e, "record rejected");
            }
            Err(e) => return Err(e.into()),
        }
    }
    let parsed = records.len();
    let (mut rows, unassigned) = corpus::assign_colleges(records, &roster, h.college_threshold);
    let unassigned_count = unassigned.len();
    rows.extend(unassigned);
    write_csv_file(&a.out, &rows)?;
    tracing::info!(pages = it.pages_fetched(), parsed, rejected, unassigned = unassigned_count, rows = rows.len(), "harvest done");
    Ok(())
}

pub fn stats(a: StatsArgs, cfg: RunConfig) -> Result<(), CliError> {
    let _lock = open_file(&a.out, "stats", &cfg)?;
    let records = read_csv_file(&a.corpus)?;
    write_json(&a.out, &stats_report(&records)?)
}

pub fn split(a: SplitArgs, mut cfg: RunConfig) -> Result<(), CliError> {
    if let Some(r) = a.ratio {
        cfg.split.ratio = r;
    }
    if let Some(s) = a.seed {
        cfg.split.seed = s;
    }
    let _lock = open_dir(&a.out, "split", &cfg)?;
    let records = read_csv_file(&a.corpus)?;
    let s = corpus::split(records, cfg.split.ratio, cfg.split.seed)?;
    write_csv_file(&a.out.join("train.csv"), &s.train)?;
    write_csv_file(&a.out.join("test.csv"), &s.test)?;
    tracing::info!(train = s.train.len(), test = s.test.len(), "split written");
    Ok(())
}

fn apply_train(o: &TrainOverrides, cfg: &mut RunConfig) {
    let t = &mut cfg.train;
    if let Some(v) = o.lr {
        t.learning_rate = v;
    }
    if let Some(v) = o.batch_size {
        t.batch_size = v;
    }
    if let Some(v) = o.epochs {
        t.epochs = v;
    }
    if o.max_steps.is_some() {
        t.max_steps = o.max_steps;
    }
    if let Some(v) = o.seed {
        t.seed = v;
    }
    if let Some(v) = o.max_source_len {
        t.max_source_len = v;
    }
    if let Some(v) = o.max_target_len {
        t.max_target_len = v;
    }
    if let Some(v) = o.lambda {
        cfg.loss.lambda = v;
    }
    if let Some(v) = o.tau_nce {
        cfg.loss.tau_nce = v;
    }
}

fn apply_decode(o: &DecodeOverrides, cfg: &mut RunConfig) {
    let d = &mut cfg.decode;
    if let Some(v) = o.num_candidates {
        d.num_candidates = v;
    }
    if let Some(v) = o.tau {
        d.tau_decode = v;
    }
    if let Some(v) = o.gamma {
        d.gamma = v;
    }
    if let Some(v) = o.max_output_tokens {
        d.max_output_tokens = v;
    }
    if let Some(v) = o.decode_seed {
        d.seed = v;
    }
}

fn load_corpus(path: &Path, college: Option<corpus::College>) -> Result<Vec<EtdRecord>, CliError> {
    let mut records = read_csv_file(path)?;
    if let Some(c) = college {
        records.retain(|r| r.college == Some(c));
    }
    Ok(records)
}

fn train_into(records: &[EtdRecord], cfg: &RunConfig, dir: &Path) -> Result<PathBuf, CliError> {
    let out = trainer::train(records, &cfg.train, &cfg.loss, Some(dir))?;
    out.checkpoints
        .last()
        .cloned()
        .ok_or_else(|| CliError::Config("training ran zero epochs; no checkpoint written".into()))
}

pub fn train(a: TrainArgs, mut cfg: RunConfig) -> Result<(), CliError> {
    apply_train(&a.overrides, &mut cfg);
    if let Some(m) = a.ablation {
        cfg.train.ablation_mode = m;
    }
    let _lock = open_dir(&a.run_dir, "train", &cfg)?;
    let records = load_corpus(&a.corpus, a.college)?;
    let last = train_into(&records, &cfg, &a.run_dir)?;
    tracing::info!(checkpoint = %last.display(), "training done");
    Ok(())
}

/// Decodes `records` and writes candidates and triples.
fn generate_into(checkpoint: &Path, records: &[EtdRecord], cfg: &RunConfig, candidates: &Path, triples: &Path) -> Result<Vec<EvalTriple>, CliError> {
    let ck = load_checkpoint(checkpoint, &Device::Cpu)?;
    let out = agp_core::decode::generate(&ck, records, &cfg.decode)?;
    let (pools, ts): (Vec<_>, Vec<_>) = out.into_iter().unzip();
    write_jsonl(BufWriter::new(File::create(candidates)?), &pools)?;
    write_jsonl(BufWriter::new(File::create(triples)?), &ts)?;
    Ok(ts)
}

pub fn generate(a: GenerateArgs, mut cfg: RunConfig) -> Result<(), CliError> {
    apply_decode(&a.overrides, &mut cfg);
    let _lock = open_file(&a.out, "generate", &cfg)?;
    let triples = a.triples.unwrap_or_else(|| a.out.with_file_name("triples.jsonl"));
    let records = read_csv_file(&a.corpus)?;
    let ts = generate_into(&a.checkpoint, &records, &cfg, &a.out, &triples)?;
    tracing::info!(outputs = ts.len(), "generation done");
    Ok(())
}

fn registry(reference_bertscore: bool) -> AdapterRegistry {
    let mut reg = AdapterRegistry::from_env();
    if reference_bertscore {
        reg.register(Box::new(ReferenceBertScore::default()));
    }
    reg
}

pub fn evaluate(a: EvaluateArgs, cfg: RunConfig) -> Result<(), CliError> {
    let _lock = open_dir(&a.out, "evaluate", &cfg)?;
    let triples = eval::read_triples(BufReader::new(File::open(&a.triples)?))?;
    let rep = eval::report(&triples, &registry(a.reference_bertscore))?;
    eval::write_report(&rep, &a.out)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct AblationRow {
    variant: AblationMode,
    #[serde(flatten)]
    metrics: MetricRow,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

fn write_ablation_csv(rows: &[AblationRow], out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["variant"];
    header.extend(&CSV_HEADER[1..]);
    w.write_record(&header)?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.variant.as_str().to_string(),
            m.count.to_string(),
            opt(Some(m.s_bleu)),
            opt(Some(m.d_bleu)),
            opt(Some(m.rouge1)),
            opt(Some(m.rouge2)),
            opt(Some(m.meteor)),
            opt(Some(m.sari)),
            opt(m.fres),
            opt(m.ltcr),
            opt(m.mtld),
            opt(m.bertscore_f1),
            opt(m.blonde_f1),
            opt(m.comet),
            opt(m.toxicity),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn ablate(a: AblateArgs, mut cfg: RunConfig) -> Result<(), CliError> {
    apply_train(&a.train_overrides, &mut cfg);
    apply_decode(&a.decode_overrides, &mut cfg);
    let _lock = open_dir(&a.out, "ablate", &cfg)?;
    let train_rows = load_corpus(&a.train, a.college)?;
    let test_rows = load_corpus(&a.test, a.college)?;
    let reg = registry(a.reference_bertscore);
    let mut rows = Vec::with_capacity(AblationMode::ALL_MODES.len());
    let mut hashes = BTreeMap::new();
    for mode in AblationMode::ALL_MODES {
        let mut mode_cfg = cfg.clone();
        mode_cfg.train.ablation_mode = mode;
        let dir = a.out.join(mode.as_str());
        let _mode_lock = open_dir(&dir, "ablate", &mode_cfg)?;
        hashes.insert(mode.as_str(), crate::config::config_hash("ablate", &mode_cfg));
        tracing::info!(variant = mode.as_str(), "training");
        let ck = train_into(&train_rows, &mode_cfg, &dir)?;
        let ts = generate_into(&ck, &test_rows, &mode_cfg, &dir.join("candidates.jsonl"), &dir.join("triples.jsonl"))?;
        let rep = eval::report(&ts, &reg)?;
        eval::write_report(&rep, &dir.join("report"))?;
        let metrics = rep.rows.get(OVERALL).cloned().expect("overall row");
        rows.push(AblationRow { variant: mode, metrics });
    }
    write_json(&a.out.join("ablation.json"), &serde_json::json!({ "config_hashes": hashes, "rows": rows }))?;
    write_ablation_csv(&rows, File::create(a.out.join("ablation.csv"))?)
}
