use std::fmt;

use serde::{Deserialize, Serialize};

use crate::text;

use super::StatsError;

/// Surface counts shared by the readability formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextCounts {
    pub sentences: usize,
    pub words: usize,
    pub syllables: usize,
    /// Letters and digits inside words.
    pub characters: usize,
    /// Words of three or more syllables.
    pub polysyllables: usize,
}

impl TextCounts {
    pub fn of(text_in: &str) -> Result<Self, StatsError> {
        let sentences = text::split_sentences(text_in).len();
        let words = text::word_tokens(text_in);
        if sentences == 0 || words.is_empty() {
            return Err(StatsError::EmptyText);
        }
        let syl: Vec<usize> = words.iter().map(|w| text::count_syllables(w)).collect();
        Ok(Self {
            sentences,
            words: words.len(),
            syllables: syl.iter().sum(),
            characters: words
                .iter()
                .map(|w| w.chars().filter(|c| c.is_alphanumeric()).count())
                .sum(),
            polysyllables: syl.iter().filter(|&&s| s >= 3).count(),
        })
    }

    fn words_per_sentence(&self) -> f64 {
        self.words as f64 / self.sentences as f64
    }

    fn syllables_per_word(&self) -> f64 {
        self.syllables as f64 / self.words as f64
    }

    fn poly_share(&self) -> f64 {
        self.polysyllables as f64 / self.words as f64
    }
}

pub fn flesch_reading_ease(c: &TextCounts) -> f64 {
    206.835 - 1.015 * c.words_per_sentence() - 84.6 * c.syllables_per_word()
}

pub fn flesch_kincaid_grade(c: &TextCounts) -> f64 {
    0.39 * c.words_per_sentence() + 11.8 * c.syllables_per_word() - 15.59
}

pub fn smog_index(c: &TextCounts) -> f64 {
    1.043 * (c.polysyllables as f64 * 30.0 / c.sentences as f64).sqrt() + 3.1291
}

pub fn coleman_liau_index(c: &TextCounts) -> f64 {
    let letters = c.characters as f64 / c.words as f64 * 100.0;
    let sentences = c.sentences as f64 / c.words as f64 * 100.0;
    0.0588 * letters - 0.296 * sentences - 15.8
}

pub fn automated_readability_index(c: &TextCounts) -> f64 {
    4.71 * (c.characters as f64 / c.words as f64) + 0.5 * c.words_per_sentence() - 21.43
}

/// Dale-Chall with words of three or more syllables standing in for words
/// outside the familiar-word list.
pub fn dale_chall_score(c: &TextCounts) -> f64 {
    let difficult = c.poly_share() * 100.0;
    let raw = 0.1579 * difficult + 0.0496 * c.words_per_sentence();
    if difficult > 5.0 {
        raw + 3.6365
    } else {
        raw
    }
}

/// Linsear Write over the whole text: easy words count 1, hard words 3.
pub fn linsear_write(c: &TextCounts) -> f64 {
    let easy = (c.words - c.polysyllables) as f64;
    let r = (easy + 3.0 * c.polysyllables as f64) / c.sentences as f64;
    if r > 20.0 {
        r / 2.0
    } else {
        r / 2.0 - 1.0
    }
}

pub fn gunning_fog(c: &TextCounts) -> f64 {
    0.4 * (c.words_per_sentence() + 100.0 * c.poly_share())
}

/// Reading-ease score to an approximate school grade.
pub fn reading_ease_grade(score: f64) -> f64 {
    match score {
        s if s >= 90.0 => 5.0,
        s if s >= 80.0 => 6.0,
        s if s >= 70.0 => 7.0,
        s if s >= 60.0 => 8.0,
        s if s >= 50.0 => 10.0,
        s if s >= 30.0 => 13.0,
        s if s >= 0.0 => 16.0,
        _ => 18.0,
    }
}

/// Dale-Chall score to an approximate school grade.
pub fn dale_chall_grade(score: f64) -> f64 {
    match score {
        s if s < 5.0 => 4.0,
        s if s < 6.0 => 5.0,
        s if s < 7.0 => 7.0,
        s if s < 8.0 => 9.0,
        s if s < 9.0 => 11.0,
        s if s < 10.0 => 13.0,
        _ => 16.0,
    }
}

/// Two consecutive school grades, e.g. 15th-16th.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeBand {
    pub lower: u32,
    pub upper: u32,
}

impl GradeBand {
    pub fn new(lower: u32) -> Self {
        Self { lower, upper: lower + 1 }
    }
}

fn ordinal(n: u32) -> String {
    let suffix = match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

impl fmt::Display for GradeBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", ordinal(self.lower), ordinal(self.upper))
    }
}

/// The eight grade estimates, each rounded and clamped at zero.
pub fn grade_estimates(c: &TextCounts) -> [u32; 8] {
    let raw = [
        flesch_kincaid_grade(c),
        reading_ease_grade(flesch_reading_ease(c)),
        smog_index(c),
        coleman_liau_index(c),
        automated_readability_index(c),
        dale_chall_grade(dale_chall_score(c)),
        linsear_write(c),
        gunning_fog(c),
    ];
    raw.map(|g| g.round().max(0.0) as u32)
}

/// Most common value; ties go to the smaller one.
pub fn mode_lowest(values: &[u32]) -> Option<u32> {
    let mut counts = std::collections::BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    let best = counts.values().copied().max()?;
    counts.into_iter().find(|&(_, n)| n == best).map(|(v, _)| v)
}

pub fn readability_consensus(text_in: &str) -> Result<GradeBand, StatsError> {
    let counts = TextCounts::of(text_in)?;
    let grade = mode_lowest(&grade_estimates(&counts)).expect("eight estimates");
    Ok(GradeBand::new(grade))
}
