//! Shared text utilities: tokenization, sentence segmentation, syllable
//! counting and the English stop-word list.
//!
//! Everything here is deterministic and allocation-light; the metric and
//! statistics modules all tokenize through these functions so that counts
//! agree across the crate.

/// Abbreviations whose trailing period never ends a sentence.
const ABBREVIATIONS: &[&str] = &[
    "al.", "approx.", "ca.", "cf.", "dept.", "dr.", "e.g.", "eq.", "eqs.", "et.", "fig.", "figs.",
    "i.e.", "inc.", "jr.", "mr.", "mrs.", "ms.", "no.", "nos.", "ph.d.", "prof.", "sr.", "st.",
    "u.s.", "vol.", "vs.", "viz.",
];

/// English function words (NLTK list).
pub const STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and", "any",
    "are", "aren", "aren't", "as", "at", "be", "because", "been", "before", "being", "below",
    "between", "both", "but", "by", "can", "couldn", "couldn't", "d", "did", "didn", "didn't",
    "do", "does", "doesn", "doesn't", "doing", "don", "don't", "down", "during", "each", "few",
    "for", "from", "further", "had", "hadn", "hadn't", "has", "hasn", "hasn't", "have", "haven",
    "haven't", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how",
    "i", "if", "in", "into", "is", "isn", "isn't", "it", "it's", "its", "itself", "just", "ll",
    "m", "ma", "me", "mightn", "mightn't", "more", "most", "mustn", "mustn't", "my", "myself",
    "needn", "needn't", "no", "nor", "not", "now", "o", "of", "off", "on", "once", "only", "or",
    "other", "our", "ours", "ourselves", "out", "over", "own", "re", "s", "same", "shan",
    "shan't", "she", "she's", "should", "should've", "shouldn", "shouldn't", "so", "some",
    "such", "t", "than", "that", "that'll", "the", "their", "theirs", "them", "themselves",
    "then", "there", "these", "they", "this", "those", "through", "to", "too", "under", "until",
    "up", "ve", "very", "was", "wasn", "wasn't", "we", "were", "weren", "weren't", "what",
    "when", "where", "which", "while", "who", "whom", "why", "will", "with", "won", "won't",
    "wouldn", "wouldn't", "y", "you", "you'd", "you'll", "you're", "you've", "your", "yours",
    "yourself", "yourselves",
];

pub fn is_stop_word(word: &str) -> bool {
    let lower = word.to_lowercase();
    STOP_WORDS.binary_search(&lower.as_str()).is_ok()
}

/// Whitespace-delimited words, untouched.
pub fn words(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Lowercased tokens: alphanumeric runs (keeping internal `'` and `-`) and
/// every other non-space character as its own token.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_word_char(c) {
            let start = i;
            i += 1;
            while i < chars.len() {
                let c = chars[i];
                if is_word_char(c) {
                    i += 1;
                } else if (c == '\'' || c == '-' || c == '\u{2019}')
                    && i + 1 < chars.len()
                    && is_word_char(chars[i + 1])
                {
                    i += 2;
                } else {
                    break;
                }
            }
            let tok: String = chars[start..i].iter().collect();
            out.push(tok.to_lowercase());
        } else {
            out.push(c.to_lowercase().collect());
            i += 1;
        }
    }
    out
}

/// Lowercased word tokens with punctuation dropped.
pub fn word_tokens(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.chars().any(is_word_char))
        .collect()
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closing(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

fn is_opening(c: char) -> bool {
    matches!(c, '"' | '\'' | '(' | '[' | '\u{201c}' | '\u{2018}')
}

fn ends_with_abbreviation(text: &str, dot_byte: usize) -> bool {
    let head = &text[..=dot_byte];
    let last_word = head
        .rsplit(|c: char| c.is_whitespace() || c == '(' || c == '[')
        .next()
        .unwrap_or("")
        .to_lowercase();
    if ABBREVIATIONS.contains(&last_word.as_str()) {
        return true;
    }
    // Single-letter initials such as "J." in "J. Smith".
    let mut cs = last_word.chars();
    matches!((cs.next(), cs.next(), cs.next()), (Some(a), Some('.'), None) if a.is_alphabetic())
}

/// Splits text into sentences.
///
/// A sentence ends at `.`, `!` or `?` (plus any closing quotes or brackets)
/// when followed by whitespace and then an uppercase letter, a digit-free
/// opening quote, or the end of the text. Periods ending a known
/// abbreviation or a single-letter initial do not end a sentence.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let idx: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < idx.len() {
        let (b, c) = idx[i];
        if !is_terminal(c) {
            i += 1;
            continue;
        }
        // absorb runs like "?!" or "..." and closing quotes
        let mut j = i + 1;
        while j < idx.len() && (is_terminal(idx[j].1) || is_closing(idx[j].1)) {
            j += 1;
        }
        let end_byte = if j < idx.len() { idx[j].0 } else { text.len() };
        let boundary = if j >= idx.len() {
            true
        } else if idx[j].1.is_whitespace() {
            let mut k = j;
            while k < idx.len() && idx[k].1.is_whitespace() {
                k += 1;
            }
            k >= idx.len() || idx[k].1.is_uppercase() || is_opening(idx[k].1)
        } else {
            false
        };
        let abbreviation = c == '.' && j == i + 1 && ends_with_abbreviation(text, b);
        if boundary && !abbreviation {
            let sentence = text[start..end_byte].trim();
            if sentence.chars().any(is_word_char) {
                out.push(sentence);
            }
            start = end_byte;
        }
        i = j;
    }
    let tail = text[start..].trim();
    if tail.chars().any(is_word_char) {
        out.push(tail);
    }
    out
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Approximate English syllable count.
///
/// Counts vowel groups, then drops a silent final `e` (but not `-le`), and
/// a silent `-ed`/`-es` after a consonant other than `t`/`d` (`-ed`) or a
/// non-sibilant (`-es`). Words without letters count zero; any word with
/// letters counts at least one.
pub fn count_syllables(word: &str) -> usize {
    let w: Vec<char> = word
        .to_lowercase()
        .chars()
        .filter(|c| c.is_alphabetic())
        .collect();
    if w.is_empty() {
        return 0;
    }
    if w.len() <= 3 {
        return 1;
    }
    let mut groups = 0usize;
    let mut prev_vowel = false;
    for &c in &w {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = w.len();
    let last = w[n - 1];
    let pen = w[n - 2];
    let ante = w[n - 3];
    if last == 'e' && pen != 'l' && !is_vowel(pen) && groups > 1 {
        groups -= 1;
    } else if last == 'd' && pen == 'e' && !is_vowel(ante) && ante != 't' && ante != 'd' {
        groups = groups.saturating_sub(1);
    } else if last == 's'
        && pen == 'e'
        && !is_vowel(ante)
        && !matches!(ante, 's' | 'x' | 'z' | 'c' | 'g' | 'h')
    {
        groups = groups.saturating_sub(1);
    }
    groups.max(1)
}

/// Total syllables over the word tokens of `text`.
pub fn text_syllables(text: &str) -> usize {
    word_tokens(text).iter().map(|w| count_syllables(w)).sum()
}

/// Contiguous n-grams of a token slice.
pub fn ngrams<T: Clone>(tokens: &[T], n: usize) -> Vec<Vec<T>> {
    if n == 0 || tokens.len() < n {
        return Vec::new();
    }
    tokens.windows(n).map(|w| w.to_vec()).collect()
}
