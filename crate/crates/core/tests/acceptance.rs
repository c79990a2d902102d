//! Acceptance checks. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use agp_core::corpus::{
    assign_colleges, default_roster, harvest, parse_record, read_csv_file, split, write_csv_file, College,
    CorpusError, DegreeLevel, EtdRecord, EtdType, HarvestConfig, DEFAULT_THRESHOLD,
};
use agp_core::decode::alignment::{EmbeddingTableScorer, OneHotScorer};
use agp_core::decode::generate::write_jsonl;
use agp_core::decode::{crowd_select, generate, levenshtein_similarity, DecodeConfig};
use agp_core::eval::{bleu, fres, report, rouge_n, sari, write_report, AdapterRegistry, BleuMode};
use agp_core::prompt::{build_prompt, extract_keywords, sample_negatives, BagOfWordsEmbedder, PromptTemplate, DYNAMIC_PREFIX};
use agp_core::stats::readability::{readability_consensus, TextCounts};
use agp_core::stats::{mtld, sentence_stats, side_stats};
use agp_core::text;
use agp_core::train::loss::{ce_loss, ce_loss_tensor, info_nce, info_nce_grad, info_nce_tensor};
use agp_core::train::trainer::moving_average;
use agp_core::train::{hybrid_loss, load_checkpoint, train, AblationMode, LossConfig, TrainConfig};
use candle_core::{DType, Device, Tensor, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

// ---------------------------------------------------------------- 1. losses

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-12)
}

fn central_diff(x: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let h = 1e-5;
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[i] += h;
            down[i] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

fn randv(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

fn criterion_losses() -> Result<String, String> {
    let start = Instant::now();
    let dev = Device::Cpu;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let tau = 0.1;

    // Indifference point: every negative scores like the positive.
    let mut worst = 0.0f64;
    for n in [1usize, 2, 4, 8] {
        let key = randv(&mut rng, 6, 1.0);
        let pos = randv(&mut rng, 6, 1.0);
        let negs = vec![pos.clone(); n];
        let v = info_nce(&key, &pos, &negs, tau).map_err(|e| e.to_string())?;
        worst = worst.max((v - (1.0 + n as f64).ln()).abs());
        let kt = Tensor::from_vec(key.clone(), (1, 6), &dev).map_err(|e| e.to_string())?;
        let pt = Tensor::from_vec(pos.clone(), (1, 6), &dev).map_err(|e| e.to_string())?;
        let nt = pt.unsqueeze(1).and_then(|t| t.repeat((1, n, 1))).map_err(|e| e.to_string())?;
        let mask = Tensor::ones((1, n), DType::F64, &dev).map_err(|e| e.to_string())?;
        let tv = info_nce_tensor(&kt, &pt, &nt, &mask, tau)
            .and_then(|t| t.to_scalar::<f64>())
            .map_err(|e| e.to_string())?;
        worst = worst.max((tv - (1.0 + n as f64).ln()).abs());
    }
    ensure(worst < 1e-9, || format!("indifference error {worst:e}"))?;

    // Hybrid endpoints.
    for _ in 0..100 {
        let ce = rng.gen_range(0.0..10.0);
        let nce = rng.gen_range(0.0..10.0);
        ensure(hybrid_loss(ce, nce, 0.0) == Ok(ce), || "hybrid(0) != ce".into())?;
        ensure(hybrid_loss(ce, nce, 1.0) == Ok(nce), || "hybrid(1) != nce".into())?;
    }

    // Gradients of the training-graph losses against central differences.
    let (f, k) = (5usize, 3usize);
    let key = randv(&mut rng, f, 0.5);
    let pos = randv(&mut rng, f, 0.5);
    let negs: Vec<Vec<f64>> = (0..k).map(|_| randv(&mut rng, f, 0.5)).collect();
    let key_var = Var::from_vec(key.clone(), (1, f), &dev).map_err(|e| e.to_string())?;
    let pt = Tensor::from_vec(pos.clone(), (1, f), &dev).map_err(|e| e.to_string())?;
    let nt = Tensor::from_vec(negs.concat(), (1, k, f), &dev).map_err(|e| e.to_string())?;
    let mask = Tensor::ones((1, k), DType::F64, &dev).map_err(|e| e.to_string())?;
    let nce_t = info_nce_tensor(key_var.as_tensor(), &pt, &nt, &mask, tau).map_err(|e| e.to_string())?;
    let g = nce_t.backward().map_err(|e| e.to_string())?;
    let auto: Vec<f64> = g
        .get(key_var.as_tensor())
        .ok_or("no key gradient")?
        .flatten_all()
        .and_then(|t| t.to_vec1())
        .map_err(|e| e.to_string())?;
    let fd = central_diff(&key, |x| info_nce(x, &pos, &negs, tau).unwrap());
    let e_nce = rel_err(&auto, &fd);
    let analytic = info_nce_grad(&key, &pos, &negs, tau).map_err(|e| e.to_string())?;
    let e_nce_analytic = rel_err(&analytic.key, &fd);

    let (t_len, vocab) = (4usize, 7usize);
    let logits = randv(&mut rng, t_len * vocab, 2.0);
    let targets: Vec<u32> = (0..t_len).map(|_| rng.gen_range(0..vocab as u32)).collect();
    let rows = |x: &[f64]| x.chunks(vocab).map(|c| c.to_vec()).collect::<Vec<_>>();
    let tgt_usize: Vec<usize> = targets.iter().map(|&t| t as usize).collect();
    let lv = Var::from_vec(logits.clone(), (1, t_len, vocab), &dev).map_err(|e| e.to_string())?;
    let tt = Tensor::from_vec(targets.clone(), (1, t_len), &dev).map_err(|e| e.to_string())?;
    let tm = Tensor::ones((1, t_len), DType::F64, &dev).map_err(|e| e.to_string())?;
    let ce_t = ce_loss_tensor(lv.as_tensor(), &tt, &tm).map_err(|e| e.to_string())?;
    let ce_val = ce_t.to_scalar::<f64>().map_err(|e| e.to_string())?;
    let ce_ref = ce_loss(&rows(&logits), &tgt_usize).map_err(|e| e.to_string())?;
    ensure((ce_val - ce_ref).abs() < 1e-12, || format!("tensor ce {ce_val} vs {ce_ref}"))?;
    let g = ce_t.backward().map_err(|e| e.to_string())?;
    let auto: Vec<f64> = g
        .get(lv.as_tensor())
        .ok_or("no logits gradient")?
        .flatten_all()
        .and_then(|t| t.to_vec1())
        .map_err(|e| e.to_string())?;
    let fd = central_diff(&logits, |x| ce_loss(&rows(x), &tgt_usize).unwrap());
    let e_ce = rel_err(&auto, &fd);

    // Hybrid over both parameter blocks at the default weight.
    let lambda = 0.3;
    let hyb = ((ce_t.clone() * (1.0 - lambda)).and_then(|a| a + (nce_t.clone() * lambda)?))
        .map_err(|e| e.to_string())?;
    let g = hyb.backward().map_err(|e| e.to_string())?;
    let mut auto: Vec<f64> = g.get(lv.as_tensor()).unwrap().flatten_all().and_then(|t| t.to_vec1()).map_err(|e| e.to_string())?;
    auto.extend(g.get(key_var.as_tensor()).unwrap().flatten_all().and_then(|t| t.to_vec1::<f64>()).map_err(|e| e.to_string())?);
    let joint: Vec<f64> = logits.iter().chain(&key).copied().collect();
    let fd = central_diff(&joint, |x| {
        let (l, kk) = x.split_at(t_len * vocab);
        hybrid_loss(ce_loss(&rows(l), &tgt_usize).unwrap(), info_nce(kk, &pos, &negs, tau).unwrap(), lambda).unwrap()
    });
    let e_h = rel_err(&auto, &fd);

    let worst_grad = e_nce.max(e_ce).max(e_h).max(e_nce_analytic);
    ensure(worst_grad < 1e-4, || format!("gradient rel err nce {e_nce:e} ce {e_ce:e} hybrid {e_h:e} analytic {e_nce_analytic:e}"))?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("ln(1+N) err {worst:.1e}; grad rel err <= {worst_grad:.1e}; {:.2?}", start.elapsed()))
}

// ---------------------------------------------------------------- 2. decoding

fn naive_edit(a: &[String], b: &[String]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

fn naive_lev_sim(a: &[String], b: &[String]) -> f64 {
    let m = a.len().max(b.len());
    if m == 0 {
        1.0
    } else {
        1.0 - naive_edit(a, b) as f64 / m as f64
    }
}

fn naive_cos(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..a.len() {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

fn naive_f1(a: &[String], b: &[String], table: &HashMap<String, Vec<f64>>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let sim = |x: &String, y: &String| naive_cos(&table[x], &table[y]);
    let mut p = 0.0;
    for x in a {
        p += b.iter().map(|y| sim(x, y)).fold(f64::NEG_INFINITY, f64::max);
    }
    p /= a.len() as f64;
    let mut r = 0.0;
    for y in b {
        r += a.iter().map(|x| sim(x, y)).fold(f64::NEG_INFINITY, f64::max);
    }
    r /= b.len() as f64;
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn criterion_decoding() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let gamma = 0.1;
    let mut worst = 0.0f64;
    for pool_no in 0..200 {
        let v = rng.gen_range(1..=10usize);
        let words: Vec<String> = (0..v).map(|i| format!("t{i}")).collect();
        let table: HashMap<String, Vec<f64>> =
            words.iter().map(|w| (w.clone(), randv(&mut rng, 4, 1.0))).collect();
        let n = rng.gen_range(1..=16usize);
        let pool: Vec<Vec<String>> = (0..n)
            .map(|_| {
                let len = rng.gen_range(0..=8usize);
                (0..len).map(|_| words[rng.gen_range(0..v)].clone()).collect()
            })
            .collect();
        let use_onehot = pool_no % 4 == 0;
        let got = if use_onehot {
            crowd_select(&pool, gamma, &OneHotScorer)
        } else {
            crowd_select(&pool, gamma, &EmbeddingTableScorer::new(table.clone()))
        }
        .map_err(|e| e.to_string())?;
        let onehot: HashMap<String, Vec<f64>> = words
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let mut e = vec![0.0; v];
                e[i] = 1.0;
                (w.clone(), e)
            })
            .collect();
        let t = if use_onehot { &onehot } else { &table };
        let mut scores = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    scores[i] += naive_f1(&pool[i], &pool[j], t) + gamma * naive_lev_sim(&pool[i], &pool[j]);
                }
            }
        }
        let mut best = 0;
        for i in 1..n {
            if scores[i] > scores[best] {
                best = i;
            }
        }
        for (a, b) in got.scores.iter().zip(&scores) {
            worst = worst.max((a - b).abs());
        }
        ensure(worst <= 1e-9, || format!("pool {pool_no}: score error {worst:e}"))?;
        ensure(got.chosen_index == best, || format!("pool {pool_no}: chose {} not {best}", got.chosen_index))?;
    }
    for pair in 0..1000 {
        let v = rng.gen_range(1..=6usize);
        let gen = |rng: &mut ChaCha8Rng| -> Vec<String> {
            let len = rng.gen_range(0..=12usize);
            (0..len).map(|_| format!("w{}", rng.gen_range(0..v))).collect()
        };
        let a = gen(&mut rng);
        let b = gen(&mut rng);
        let got = levenshtein_similarity(&a, &b);
        let want = naive_lev_sim(&a, &b);
        ensure((got - want).abs() <= 1e-12, || format!("pair {pair}: {got} vs {want}"))?;
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("200 pools, max score err {worst:.1e}; 1000 edit pairs; {:.2?}", start.elapsed()))
}

// ---------------------------------------------------------------- 3. metrics

fn grams(toks: &[String], n: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    if toks.len() >= n {
        for i in 0..=toks.len() - n {
            out.push(toks[i..i + n].to_vec());
        }
    }
    out
}

fn occurrences(list: &[Vec<String>], g: &[String]) -> usize {
    list.iter().filter(|x| x.as_slice() == g).count()
}

/// Distinct n-grams in sorted order with their multiplicities.
fn multiset(list: &[Vec<String>]) -> Vec<(Vec<String>, usize)> {
    let mut distinct: Vec<Vec<String>> = Vec::new();
    for g in list {
        if !distinct.contains(g) {
            distinct.push(g.clone());
        }
    }
    distinct.sort();
    distinct.into_iter().map(|g| {
        let c = occurrences(list, &g);
        (g, c)
    }).collect()
}

fn clipped(h: &[Vec<String>], r: &[Vec<String>]) -> usize {
    multiset(h).iter().map(|(g, c)| (*c).min(occurrences(r, g))).sum()
}

fn oracle_bleu(h: &[String], r: &[String], smooth: bool) -> f64 {
    if h.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    let mut orders = 0usize;
    for n in 1..=4 {
        let hg = grams(h, n);
        if hg.is_empty() {
            continue;
        }
        let m = clipped(&hg, &grams(r, n));
        let p = if smooth && n > 1 { (m as f64 + 1.0) / (hg.len() as f64 + 1.0) } else { m as f64 / hg.len() as f64 };
        if p == 0.0 {
            return 0.0;
        }
        log_sum += p.ln();
        orders += 1;
    }
    let (c, rl) = (h.len() as f64, r.len() as f64);
    let bp = if c > rl { 1.0 } else { (1.0 - rl / c).exp() };
    100.0 * bp * (log_sum / orders as f64).exp()
}

fn oracle_rouge(h: &[String], r: &[String], n: usize) -> f64 {
    let (hg, rg) = (grams(h, n), grams(r, n));
    if hg.is_empty() || rg.is_empty() {
        return 0.0;
    }
    let overlap = clipped(&hg, &rg) as f64;
    if overlap == 0.0 {
        return 0.0;
    }
    let p = overlap / hg.len() as f64;
    let rc = overlap / rg.len() as f64;
    100.0 * 2.0 * p * rc / (p + rc)
}

fn oracle_f1(p: f64, r: f64) -> f64 {
    if p > 0.0 || r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn oracle_sari(s: &[String], c: &[String], r: &[String]) -> f64 {
    let (mut keep, mut del, mut add) = (0.0, 0.0, 0.0);
    for n in 1..=4 {
        let (sg, cg, rg) = (grams(s, n), grams(c, n), grams(r, n));
        let sm = multiset(&sg);
        // keep: min(S, C); good: min(keep, R); all: min(S, R)
        let keep_set: Vec<(Vec<String>, usize)> = sm
            .iter()
            .filter_map(|(g, k)| {
                let m = (*k).min(occurrences(&cg, g));
                (m > 0).then(|| (g.clone(), m))
            })
            .collect();
        let good = |g: &Vec<String>, k: usize| k.min(occurrences(&rg, g));
        let keep_all: usize = sm.iter().map(|(g, k)| (*k).min(occurrences(&rg, g))).sum();
        let keep_good: usize = keep_set.iter().map(|(g, k)| good(g, *k)).sum();
        let kp = if keep_set.is_empty() {
            1.0
        } else {
            keep_set.iter().map(|(g, k)| good(g, *k) as f64 / *k as f64).sum::<f64>() / keep_set.len() as f64
        };
        let kr = if keep_all == 0 { 1.0 } else { keep_good as f64 / keep_all as f64 };
        keep += oracle_f1(kp, kr);

        // delete: S - C; good: (S - C) - R
        let del_set: Vec<(Vec<String>, usize)> = sm
            .iter()
            .filter_map(|(g, k)| {
                let m = k.saturating_sub(occurrences(&cg, g));
                (m > 0).then(|| (g.clone(), m))
            })
            .collect();
        del += if del_set.is_empty() {
            1.0
        } else {
            del_set
                .iter()
                .map(|(g, k)| k.saturating_sub(occurrences(&rg, g)) as f64 / *k as f64)
                .sum::<f64>()
                / del_set.len() as f64
        };

        // add: set(C) - set(S)
        let added: Vec<Vec<String>> = multiset(&cg).into_iter().map(|(g, _)| g).filter(|g| !sg.contains(g)).collect();
        let add_good = added.iter().filter(|g| rg.contains(g)).count();
        let add_all = multiset(&rg).into_iter().filter(|(g, _)| !sg.contains(g)).count();
        let ap = if added.is_empty() { 1.0 } else { add_good as f64 / added.len() as f64 };
        let ar = if add_all == 0 { 1.0 } else { add_good as f64 / add_all as f64 };
        add += oracle_f1(ap, ar);
    }
    100.0 * (keep / 4.0 + del / 4.0 + add / 4.0) / 3.0
}

fn metric_fixture() -> Vec<(String, String, String)> {
    let words = ["the", "cat", "sat", "on", "mat", "a", "dog", "ran", "big", "red"];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let gen = |rng: &mut ChaCha8Rng| -> String {
        let len = rng.gen_range(1..=12usize);
        (0..len).map(|_| words[rng.gen_range(0..words.len())]).collect::<Vec<_>>().join(" ")
    };
    let mut out = vec![
        ("the cat sat on the mat".to_string(), "the cat sat on the mat".to_string(), "the cat sat on the mat".to_string()),
        ("a big dog".to_string(), "the cat sat".to_string(), "red mat ran".to_string()),
        ("a b c".to_string(), "a x c".to_string(), "a x c".to_string()),
    ];
    while out.len() < 50 {
        let s = gen(&mut rng);
        let r = gen(&mut rng);
        let h = if rng.gen_bool(0.3) {
            // Edit the reference so overlap is common.
            let mut t: Vec<&str> = r.split(' ').collect();
            let i = rng.gen_range(0..t.len());
            t[i] = words[rng.gen_range(0..words.len())];
            t.join(" ")
        } else {
            gen(&mut rng)
        };
        out.push((s, r, h));
    }
    out
}

fn criterion_metrics() -> Result<String, String> {
    let start = Instant::now();
    let split = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
    let mut checked = 0;
    for (i, (s, r, h)) in metric_fixture().iter().enumerate() {
        let (st, rt, ht) = (split(s), split(r), split(h));
        ensure(st.len() <= 12 && rt.len() <= 12 && ht.len() <= 12, || format!("triple {i} too long"))?;
        let pairs = [
            ("d-bleu", bleu(h, r, BleuMode::Document), oracle_bleu(&ht, &rt, false)),
            ("s-bleu", bleu(h, r, BleuMode::Sentence), oracle_bleu(&ht, &rt, true)),
            ("rouge1", rouge_n(h, r, 1), oracle_rouge(&ht, &rt, 1)),
            ("rouge2", rouge_n(h, r, 2), oracle_rouge(&ht, &rt, 2)),
            ("sari", sari(s, h, r), oracle_sari(&st, &ht, &rt)),
        ];
        for (name, got, want) in pairs {
            ensure(got == want, || format!("triple {i} {name}: {got} vs oracle {want}"))?;
            checked += 1;
        }
    }
    let f = fres("The cat sat.").map_err(|e| e.to_string())?;
    ensure((f - 119.19).abs() <= 0.01, || format!("fres {f}"))?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{checked} metric values equal the oracle; fres {f:.3}; {:.2?}", start.elapsed()))
}

// ---------------------------------------------------------------- 4. prompts

fn criterion_prompts() -> Result<String, String> {
    let pool = [
        "polymer", "membrane", "catalyst", "turbine", "enzyme", "lattice", "protein", "sensor", "reactor", "alloy",
        "genome", "circuit", "aquifer", "sediment", "neuron", "photon", "the", "of", "and", "in", "with",
    ];
    let template = PromptTemplate::default();
    let mut prefixed = 0;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = rng.gen_range(8..40usize);
        let doc = (0..len).map(|_| pool[rng.gen_range(0..pool.len())]).collect::<Vec<_>>().join(" ") + " polymer.";
        let embedder = BagOfWordsEmbedder::fit([doc.as_str()]);
        let count = rng.gen_range(1..=8usize);
        let positives = extract_keywords(&doc, &embedder, count);
        let phrases: Vec<String> = positives.iter().map(|k| k.phrase.clone()).collect();
        let tokens = text::word_tokens(&doc);
        let negatives = sample_negatives(&tokens, &phrases, rng.gen_range(1..=8usize), seed);
        let positive_words: BTreeSet<String> =
            phrases.iter().flat_map(|p| text::word_tokens(p)).chain(phrases.iter().cloned()).collect();
        for n in &negatives {
            ensure(!positive_words.contains(n), || format!("seed {seed}: negative {n:?} overlaps positives {phrases:?}"))?;
        }
        let prompt = build_prompt(&template, &phrases);
        ensure(prompt.starts_with(DYNAMIC_PREFIX), || format!("seed {seed}: prompt {prompt:?}"))?;
        prefixed += 1;
    }
    Ok(format!("{prefixed}/1000 prompts start with the template; no negative overlaps"))
}

// ---------------------------------------------------------------- 5. training

const NOUNS: [&str; 10] = ["polymer", "enzyme", "turbine", "protein", "sensor", "crystal", "membrane", "circuit", "catalyst", "reactor"];
const PLAIN: [&str; 10] = ["plastic", "helper", "fan", "builder", "detector", "stone", "skin", "wiring", "booster", "tank"];
const VERBS: [&str; 5] = ["modulates", "stabilizes", "degrades", "amplifies", "regulates"];
const SIMPLE: [&str; 5] = ["changes", "steadies", "breaks", "boosts", "controls"];

fn synthetic_pairs(n: usize) -> Vec<EtdRecord> {
    (0..n)
        .map(|i| {
            let (a, b, v) = (i % 10, (i / 10 + i) % 10, i % 5);
            EtdRecord {
                identifier_uri: format!("syn-{i}"),
                title: String::new(),
                abstract_text: format!("The {} {} the {} in vitro.", NOUNS[a], VERBS[v], NOUNS[b]),
                abstract_general: format!("The {} {} the {}.", PLAIN[a], SIMPLE[v], PLAIN[b]),
                subject_terms: vec![NOUNS[a].to_string()],
                discipline: String::new(),
                department: String::new(),
                degree: String::new(),
                degree_level: DegreeLevel::Masters,
                etd_type: EtdType::Thesis,
                college: Some(College::Science),
            }
        })
        .collect()
}

fn criterion_training() -> Result<String, String> {
    let start = Instant::now();
    let cfg = TrainConfig {
        learning_rate: 5e-3,
        max_steps: Some(30),
        epochs: 10,
        ablation_mode: AblationMode::All,
        ..Default::default()
    };
    let loss = LossConfig::default();
    ensure(loss.lambda == 0.3 && loss.tau_nce == 0.1 && cfg.batch_size == 4, || "defaults changed".into())?;
    ensure(cfg.model.num_layers == 2, || "model is not 2 layers".into())?;
    let records = synthetic_pairs(50);
    let out = train(&records, &cfg, &loss, None).map_err(|e| e.to_string())?;
    ensure(out.vocab.len() <= 256, || format!("vocab {}", out.vocab.len()))?;
    ensure(out.log.len() == 30, || format!("{} steps logged", out.log.len()))?;
    let hybrid: Vec<f64> = out.log.iter().map(|e| e.hybrid).collect();
    let ma = moving_average(&hybrid, 10);
    ensure(ma.windows(2).all(|w| w[1] < w[0]), || format!("moving average not decreasing: {ma:?}"))?;

    let ft = TrainConfig { ablation_mode: AblationMode::FinetuneOnly, ..cfg.clone() };
    let out_ft = train(&records, &ft, &loss, None).map_err(|e| e.to_string())?;
    ensure(out_ft.log.iter().all(|e| e.nce == 0.0), || "finetune_only logged non-zero nce".into())?;
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "MA {:.3} -> {:.3} over {} windows; finetune_only nce all 0; {:.2?}",
        ma[0],
        ma[ma.len() - 1],
        ma.len(),
        start.elapsed()
    ))
}

// ---------------------------------------------------------------- 6. corpus

fn oai_record(i: usize, department: &str, general: bool) -> String {
    let general = if general {
        format!(r#"<dim:field mdschema="dc" element="description" qualifier="abstractgeneral">Plain summary {i}.</dim:field>"#)
    } else {
        String::new()
    };
    format!(
        r#"<record><header><identifier>oai:example:{i}</identifier><datestamp>2020-01-01</datestamp></header><metadata>
<dim:dim xmlns:dim="http://www.dspace.org/xmlns/dspace/dim">
<dim:field mdschema="dc" element="identifier" qualifier="uri">http://hdl.handle.net/10919/{i}</dim:field>
<dim:field mdschema="dc" element="title">Thesis &amp; number {i}</dim:field>
<dim:field mdschema="dc" element="description" qualifier="abstract">Academic abstract {i}, with "quotes"; commas.</dim:field>
{general}
<dim:field mdschema="dc" element="subject" qualifier="none">term {i}</dim:field>
<dim:field mdschema="dc" element="subject" qualifier="none">shared term</dim:field>
<dim:field mdschema="thesis" element="degree" qualifier="discipline">{department}</dim:field>
<dim:field mdschema="dc" element="contributor" qualifier="department">{department}</dim:field>
<dim:field mdschema="thesis" element="degree" qualifier="name">Master of Science</dim:field>
<dim:field mdschema="thesis" element="degree" qualifier="level">{level}</dim:field>
<dim:field mdschema="dc" element="type">{kind}</dim:field>
</dim:dim></metadata></record>"#,
        level = if i % 3 == 0 { "doctoral" } else { "masters" },
        kind = if i % 3 == 0 { "Dissertation" } else { "Thesis" },
    )
}

fn oai_page(records: &[String], token: Option<&str>) -> String {
    let token = match token {
        Some(t) => format!(r#"<resumptionToken completeListSize="155">{t}</resumptionToken>"#),
        None => "<resumptionToken/>".into(),
    };
    format!(
        r#"<?xml version="1.0" encoding="UTF-8"?><OAI-PMH xmlns="http://www.openarchives.org/OAI/2.0/"><responseDate>2024-01-01T00:00:00Z</responseDate><request verb="ListRecords">http://localhost/oai</request><ListRecords>{}{token}</ListRecords></OAI-PMH>"#,
        records.concat()
    )
}

fn criterion_corpus() -> Result<String, String> {
    let start = Instant::now();
    let roster = default_roster();
    let mut departments: Vec<String> = roster.values().flatten().cloned().collect();
    departments.sort();
    departments.dedup();
    let bse = "Biological Systems Engineering";
    let dept = |i: usize| if i % 10 == 0 { bse.to_string() } else { departments[i % departments.len()].clone() };
    let page1: Vec<String> = (0..100).map(|i| oai_record(i, &dept(i), true)).collect();
    let mut page2: Vec<String> = (100..150).map(|i| oai_record(i, &dept(i), true)).collect();
    page2.extend((150..155).map(|i| oai_record(i, &dept(i), false)));
    let bodies = [oai_page(&page1, Some("page-2")), oai_page(&page2, None)];

    let server = tiny_http::Server::http("127.0.0.1:0").map_err(|e| e.to_string())?;
    let port = server.server_addr().to_ip().ok_or("no port")?.port();
    let handle = std::thread::spawn(move || {
        let mut urls = Vec::new();
        for _ in 0..2 {
            let Ok(req) = server.recv() else { break };
            let url = req.url().to_string();
            let body = if url.contains("resumptionToken=page-2") { bodies[1].clone() } else { bodies[0].clone() };
            urls.push(url);
            let _ = req.respond(tiny_http::Response::from_string(body));
        }
        urls
    });

    let mut cfg = HarvestConfig::new(format!("http://127.0.0.1:{port}/oai"), "dim");
    cfg.min_delay = Duration::ZERO;
    let mut parsed = Vec::new();
    let mut rejected = 0;
    for raw in harvest(cfg) {
        let raw = raw.map_err(|e| e.to_string())?;
        match parse_record(&raw) {
            Ok(r) => parsed.push(r),
            Err(CorpusError::MissingField(f)) if f.contains("general") => rejected += 1,
            Err(e) => return Err(format!("unexpected error {e}")),
        }
    }
    let urls = handle.join().map_err(|_| "server panicked")?;
    ensure(urls.len() == 2, || format!("{} requests", urls.len()))?;
    ensure(parsed.len() == 150, || format!("{} parsed", parsed.len()))?;
    ensure(rejected == 5, || format!("{rejected} rejected"))?;

    let (assigned, unassigned) = assign_colleges(parsed, &roster, DEFAULT_THRESHOLD);
    ensure(unassigned.is_empty(), || format!("{} unassigned", unassigned.len()))?;
    let bse_colleges: BTreeSet<College> = assigned
        .iter()
        .filter(|r| r.identifier_uri.ends_with("/10919/0"))
        .filter_map(|r| r.college)
        .collect();
    let want: BTreeSet<College> = [College::Engineering, College::AgricultureLifeSciences].into();
    ensure(bse_colleges == want, || format!("BSE mapped to {bse_colleges:?}"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("corpus.csv");
    write_csv_file(&path, &assigned).map_err(|e| e.to_string())?;
    let back = read_csv_file(&path).map_err(|e| e.to_string())?;
    ensure(back == assigned, || "CSV round trip changed records".into())?;

    let s = split(assigned.clone(), 0.8, 42).map_err(|e| e.to_string())?;
    let mut totals: BTreeMap<Option<College>, (usize, usize)> = BTreeMap::new();
    for r in &s.train {
        totals.entry(r.college).or_default().0 += 1;
    }
    for r in &s.test {
        totals.entry(r.college).or_default().1 += 1;
    }
    for (c, (tr, te)) in &totals {
        let n = tr + te;
        let target = 0.8 * n as f64;
        ensure((*tr as f64 - target).abs() <= 1.0, || format!("{c:?}: {tr} train of {n}"))?;
    }
    let train_ids: BTreeSet<&str> = s.train.iter().map(|r| r.identifier_uri.as_str()).collect();
    ensure(s.test.iter().all(|r| !train_ids.contains(r.identifier_uri.as_str())), || "document in both splits".into())?;
    Ok(format!(
        "150 parsed, 5 rejected, {} rows over {} colleges, CSV identical, split within 1; {:.2?}",
        assigned.len(),
        totals.len(),
        start.elapsed()
    ))
}

// ---------------------------------------------------------------- 7. stats

/// Word, syllables, letters.
const LEXICON: [(&str, usize); 15] = [
    ("cat", 1), ("dog", 1), ("sun", 1), ("tree", 1), ("bird", 1),
    ("paper", 2), ("water", 2), ("garden", 2), ("silver", 2), ("window", 2),
    ("elephant", 3), ("banana", 3), ("animal", 3), ("tomato", 3), ("umbrella", 3),
];

struct Doc {
    text: String,
    sentences: usize,
    words: usize,
    syllables: usize,
    letters: usize,
    poly: usize,
    tokens: Vec<String>,
}

fn stats_fixture() -> Vec<Doc> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..30)
        .map(|d| {
            let sentences = 1 + d % 4;
            let mut parts = Vec::new();
            let mut doc = Doc { text: String::new(), sentences, words: 0, syllables: 0, letters: 0, poly: 0, tokens: vec![] };
            for k in 0..sentences {
                let len = 3 + (d + k) % 5 + if d % 7 == 0 { 12 } else { 0 };
                let mut ws = Vec::new();
                for _ in 0..len {
                    let (w, syl) = LEXICON[rng.gen_range(0..LEXICON.len())];
                    doc.words += 1;
                    doc.syllables += syl;
                    doc.letters += w.len();
                    doc.poly += usize::from(syl >= 3);
                    doc.tokens.push(w.to_string());
                    ws.push(w.to_string());
                }
                let mut first = ws[0].chars();
                ws[0] = first.next().unwrap().to_uppercase().chain(first).collect();
                parts.push(format!("{}.", ws.join(" ")));
            }
            doc.text = parts.join(" ");
            doc
        })
        .collect()
}

fn oracle_mtld_pass(tokens: &[String]) -> f64 {
    let mut factors = 0.0;
    let mut seen: Vec<&String> = Vec::new();
    let mut n = 0usize;
    let mut last_ttr = 1.0;
    for t in tokens {
        n += 1;
        if !seen.contains(&t) {
            seen.push(t);
        }
        last_ttr = seen.len() as f64 / n as f64;
        if last_ttr < 0.72 {
            factors += 1.0;
            seen.clear();
            n = 0;
            last_ttr = 1.0;
        }
    }
    if n > 0 {
        factors += (1.0 - last_ttr) / 0.28;
    }
    factors
}

fn oracle_mtld(tokens: &[String]) -> Option<f64> {
    let rev: Vec<String> = tokens.iter().rev().cloned().collect();
    let vals: Vec<f64> = [oracle_mtld_pass(tokens), oracle_mtld_pass(&rev)]
        .into_iter()
        .filter(|f| *f > 0.0)
        .map(|f| tokens.len() as f64 / f)
        .collect();
    match vals.len() {
        0 => None,
        n => Some(vals.iter().sum::<f64>() / n as f64),
    }
}

fn oracle_grade(d: &Doc) -> u32 {
    let (w, s, syl, poly, ch) = (d.words as f64, d.sentences as f64, d.syllables as f64, d.poly as f64, d.letters as f64);
    let fk = 0.39 * w / s + 11.8 * syl / w - 15.59;
    let fre = 206.835 - 1.015 * w / s - 84.6 * syl / w;
    let fre_grade = [(90.0, 5.0), (80.0, 6.0), (70.0, 7.0), (60.0, 8.0), (50.0, 10.0), (30.0, 13.0), (0.0, 16.0)]
        .iter()
        .find(|(lo, _)| fre >= *lo)
        .map(|(_, g)| *g)
        .unwrap_or(18.0);
    let smog = 1.043 * (poly * 30.0 / s).sqrt() + 3.1291;
    let cli = 0.0588 * (ch / w * 100.0) - 0.296 * (s / w * 100.0) - 15.8;
    let ari = 4.71 * ch / w + 0.5 * w / s - 21.43;
    let pct = poly / w * 100.0;
    let dc = 0.1579 * pct + 0.0496 * w / s + if pct > 5.0 { 3.6365 } else { 0.0 };
    let dc_grade = [(5.0, 4.0), (6.0, 5.0), (7.0, 7.0), (8.0, 9.0), (9.0, 11.0), (10.0, 13.0)]
        .iter()
        .find(|(hi, _)| dc < *hi)
        .map(|(_, g)| *g)
        .unwrap_or(16.0);
    let r = ((w - poly) + 3.0 * poly) / s;
    let linsear = if r > 20.0 { r / 2.0 } else { r / 2.0 - 1.0 };
    let fog = 0.4 * (w / s + 100.0 * poly / w);
    let grades: Vec<u32> = [fk, fre_grade, smog, cli, ari, dc_grade, linsear, fog]
        .iter()
        .map(|g| g.round().max(0.0) as u32)
        .collect();
    let mut tally: BTreeMap<u32, usize> = BTreeMap::new();
    for g in grades {
        *tally.entry(g).or_default() += 1;
    }
    let top = *tally.values().max().unwrap();
    *tally.iter().find(|(_, c)| **c == top).unwrap().0
}

fn criterion_stats() -> Result<String, String> {
    for (w, syl) in LEXICON {
        ensure(text::count_syllables(w) == syl, || format!("syllables of {w}: {}", text::count_syllables(w)))?;
    }
    let docs = stats_fixture();
    let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();

    let total_s: usize = docs.iter().map(|d| d.sentences).sum();
    let total_w: usize = docs.iter().map(|d| d.words).sum();
    let s = sentence_stats(&texts).map_err(|e| e.to_string())?;
    ensure(s.sentences == total_s && s.words == total_w && s.documents == 30, || format!("{s:?}"))?;
    ensure(s.avg_sentences == total_s as f64 / 30.0, || "avg sentences".into())?;
    ensure(s.avg_sentence_len == total_w as f64 / total_s as f64, || "avg sentence length".into())?;

    let mut mtld_err = 0.0f64;
    let mut mtld_sum = 0.0;
    let mut mtld_n = 0;
    let mut grades = Vec::new();
    for (i, d) in docs.iter().enumerate() {
        let c = TextCounts::of(&d.text).map_err(|e| e.to_string())?;
        ensure(
            (c.sentences, c.words, c.syllables, c.characters, c.polysyllables) == (d.sentences, d.words, d.syllables, d.letters, d.poly),
            || format!("doc {i} counts {c:?}"),
        )?;
        let got = mtld(&text::word_tokens(&d.text)).value;
        let want = oracle_mtld(&d.tokens);
        match (got, want) {
            (Some(a), Some(b)) => {
                mtld_err = mtld_err.max((a - b).abs());
                mtld_sum += b;
                mtld_n += 1;
            }
            (None, None) => {}
            other => return Err(format!("doc {i} mtld {other:?}")),
        }
        let g = oracle_grade(d);
        let band = readability_consensus(&d.text).map_err(|e| e.to_string())?;
        ensure(band.lower == g, || format!("doc {i}: consensus {} vs oracle {g}", band.lower))?;
        grades.push(g);
    }
    ensure(mtld_err < 1e-6, || format!("mtld error {mtld_err:e}"))?;
    let side = side_stats(&texts).map_err(|e| e.to_string())?;
    let mean = mtld_sum / mtld_n as f64;
    ensure((side.mtld.unwrap_or(f64::NAN) - mean).abs() < 1e-6, || format!("mean mtld {:?} vs {mean}", side.mtld))?;
    let mut tally: BTreeMap<u32, usize> = BTreeMap::new();
    for g in &grades {
        *tally.entry(*g).or_default() += 1;
    }
    let top = *tally.values().max().unwrap();
    let mode = *tally.iter().find(|(_, c)| **c == top).unwrap().0;
    ensure(side.readability_consensus.lower == mode, || format!("collection band {:?} vs {mode}", side.readability_consensus))?;
    Ok(format!(
        "{total_s} sentences / {total_w} words exact; mtld err {mtld_err:.1e}; consensus {}",
        side.readability_consensus
    ))
}

// ---------------------------------------------------------------- 8. determinism

fn generate_and_evaluate(checkpoint: &Path, records: &[EtdRecord], out: &Path) -> Result<(), String> {
    let ck = load_checkpoint(checkpoint, &Device::Cpu).map_err(|e| e.to_string())?;
    let cfg = DecodeConfig { num_candidates: 4, max_output_tokens: 12, ..Default::default() };
    let res = generate(&ck, records, &cfg).map_err(|e| e.to_string())?;
    let (pools, triples): (Vec<_>, Vec<_>) = res.into_iter().unzip();
    std::fs::create_dir_all(out).map_err(|e| e.to_string())?;
    write_jsonl(std::fs::File::create(out.join("candidates.jsonl")).map_err(|e| e.to_string())?, &pools)
        .map_err(|e| e.to_string())?;
    let rep = report(&triples, &AdapterRegistry::new()).map_err(|e| e.to_string())?;
    write_report(&rep, &out.join("report")).map_err(|e| e.to_string())
}

fn criterion_determinism() -> Result<String, String> {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let records = synthetic_pairs(16);
    let cfg = TrainConfig {
        max_steps: Some(4),
        epochs: 1,
        max_source_len: 32,
        max_target_len: 16,
        ablation_mode: AblationMode::All,
        ..Default::default()
    };
    let out = train(&records, &cfg, &LossConfig::default(), Some(dir.path())).map_err(|e| e.to_string())?;
    let ck = out.checkpoints.last().ok_or("no checkpoint")?;
    let test = &records[..6];
    generate_and_evaluate(ck, test, &dir.path().join("run1"))?;
    generate_and_evaluate(ck, test, &dir.path().join("run2"))?;
    for f in ["candidates.jsonl", "report/report.json", "report/report.csv"] {
        let a = std::fs::read(dir.path().join("run1").join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dir.path().join("run2").join(f)).map_err(|e| e.to_string())?;
        ensure(!a.is_empty() && a == b, || format!("{f} differs between runs"))?;
    }
    Ok(format!("candidates.jsonl and report files byte-identical; {:.2?}", start.elapsed()))
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("loss correctness", criterion_losses),
        ("decoding oracle", criterion_decoding),
        ("metric oracle equivalence", criterion_metrics),
        ("prompt subsystem", criterion_prompts),
        ("training smoke", criterion_training),
        ("corpus pipeline", criterion_corpus),
        ("stats regression", criterion_stats),
        ("determinism", criterion_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("acceptance {} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("acceptance {} FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
