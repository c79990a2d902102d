//! SARI against a single reference.

use std::collections::{BTreeMap, BTreeSet};

use crate::text;

use super::ngram::counts;

fn f1(p: f64, r: f64) -> f64 {
    if p > 0.0 || r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

type Multiset<'a> = BTreeMap<&'a [String], usize>;

fn intersect<'a>(a: &Multiset<'a>, b: &Multiset<'a>) -> Multiset<'a> {
    a.iter()
        .filter_map(|(g, &c)| b.get(g).map(|&d| (*g, c.min(d))))
        .collect()
}

fn subtract<'a>(a: &Multiset<'a>, b: &Multiset<'a>) -> Multiset<'a> {
    a.iter()
        .filter_map(|(g, &c)| {
            let rest = c.saturating_sub(b.get(g).copied().unwrap_or(0));
            (rest > 0).then_some((*g, rest))
        })
        .collect()
}

/// Keep F1, deletion precision and addition F1 for one n-gram order.
/// Empty denominators count as 1.
pub fn sari_components(source: &[String], hyp: &[String], reference: &[String], n: usize) -> (f64, f64, f64) {
    let s = counts(source, n);
    let c = counts(hyp, n);
    let r = counts(reference, n);

    let keep = intersect(&s, &c);
    let keep_good = intersect(&keep, &r);
    let keep_all = intersect(&s, &r);
    let keep_p = if keep.is_empty() {
        1.0
    } else {
        keep.iter().map(|(g, &k)| keep_good.get(g).copied().unwrap_or(0) as f64 / k as f64).sum::<f64>()
            / keep.len() as f64
    };
    let keep_r = if keep_all.is_empty() {
        1.0
    } else {
        keep_good.values().sum::<usize>() as f64 / keep_all.values().sum::<usize>() as f64
    };

    let del = subtract(&s, &c);
    let del_good = subtract(&del, &r);
    let del_p = if del.is_empty() {
        1.0
    } else {
        del.iter().map(|(g, &k)| del_good.get(g).copied().unwrap_or(0) as f64 / k as f64).sum::<f64>()
            / del.len() as f64
    };

    let s_set: BTreeSet<&[String]> = s.keys().copied().collect();
    let r_set: BTreeSet<&[String]> = r.keys().copied().collect();
    let add: BTreeSet<&[String]> = c.keys().copied().filter(|g| !s_set.contains(g)).collect();
    let add_good = add.iter().filter(|g| r_set.contains(*g)).count();
    let add_all = r_set.iter().filter(|g| !s_set.contains(*g)).count();
    let add_p = if add.is_empty() { 1.0 } else { add_good as f64 / add.len() as f64 };
    let add_r = if add_all == 0 { 1.0 } else { add_good as f64 / add_all as f64 };

    (f1(keep_p, keep_r), del_p, f1(add_p, add_r))
}

/// SARI in percent: mean of keep, delete and add scores, each averaged over orders 1 to 4.
pub fn sari_tokens(source: &[String], hyp: &[String], reference: &[String]) -> f64 {
    let (mut keep, mut del, mut add) = (0.0, 0.0, 0.0);
    for n in 1..=4 {
        let (k, d, a) = sari_components(source, hyp, reference, n);
        keep += k;
        del += d;
        add += a;
    }
    100.0 * (keep / 4.0 + del / 4.0 + add / 4.0) / 3.0
}

pub fn sari(source: &str, hypothesis: &str, reference: &str) -> f64 {
    sari_tokens(&text::tokenize(source), &text::tokenize(hypothesis), &text::tokenize(reference))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        text::tokenize(s)
    }

    #[test]
    fn all_equal_is_full_marks() {
        let t = toks("the cat sat on the mat");
        for n in 1..=4 {
            assert_eq!(sari_components(&t, &t, &t, n), (1.0, 1.0, 1.0));
        }
        assert!((sari_tokens(&t, &t, &t) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn copying_the_source_adds_nothing() {
        let s = toks("the feline sat");
        let r = toks("the cat sat");
        for n in 1..=3 {
            assert_eq!(sari_components(&s, &s, &r, n).2, 0.0);
        }
    }

    #[test]
    fn one_word_substitution_by_hand() {
        // source "a b c", hyp = ref = "a x c".
        let s = toks("a b c");
        let h = toks("a x c");
        // n=1: keep {a,c} all good -> P=1, R=2/2 -> 1; del {b}, not in ref -> 1; add {x} in ref -> 1.
        assert_eq!(sari_components(&s, &h, &h, 1), (1.0, 1.0, 1.0));
        // n=2: keep {} -> P=1; keep_all {} -> R=1 -> 1; del {ab, bc} good -> 1; add {ax, xc} good -> 1.
        assert_eq!(sari_components(&s, &h, &h, 2), (1.0, 1.0, 1.0));
        // n=3: same shape.
        assert_eq!(sari_components(&s, &h, &h, 3), (1.0, 1.0, 1.0));
        // n=4: everything empty -> defaults; addition: add {} -> P=1, add_all {} -> R=1.
        assert_eq!(sari_components(&s, &h, &h, 4), (1.0, 1.0, 1.0));
        // Hypothesis = source instead: n=1 keep {a,b,c}: good {a,c}: P=2/3; keep_all {a,c}: R=1.
        let (k, d, a) = sari_components(&s, &s, &h, 1);
        assert!((k - f1(2.0 / 3.0, 1.0)).abs() < 1e-12);
        assert_eq!((d, a), (1.0, 0.0));
    }
}
