//! Flesch Reading Ease.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// (lower bound, label), highest band first. A score belongs to the first band
/// whose lower bound it reaches.
pub const FRES_BANDS: [(f64, &str); 8] = [
    (90.0, "5th grade / Very easy to read"),
    (80.0, "6th grade / Easy to read"),
    (70.0, "7th grade / Fairly easy to read"),
    (60.0, "8th & 9th grade / Plain English"),
    (50.0, "10th to 12th grade / Fairly difficult to read"),
    (30.0, "College / Difficult to read"),
    (10.0, "College graduate / Very difficult to read"),
    (f64::NEG_INFINITY, "Professional / Extremely difficult to read"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityStats {
    pub total_words: usize,
    pub total_sentences: usize,
    pub total_syllables: usize,
    pub fres: f64,
    pub band: String,
}

/// Band label for a score. Scores above 100 fall in the top band, NaN in the
/// bottom one.
pub fn interpret_fres(score: f64) -> &'static str {
    FRES_BANDS.iter().find(|(lower, _)| score >= *lower).map(|b| b.1).unwrap_or(FRES_BANDS[7].1)
}

/// 206.835 - 1.015 (words / sentences) - 84.6 (syllables / words)
pub fn flesch(words: usize, sentences: usize, syllables: usize) -> f64 {
    206.835 - 1.015 * (words as f64 / sentences as f64) - 84.6 * (syllables as f64 / words as f64)
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel groups (a e i o u y), minus a silent final "e" that follows a
/// consonant unless the word ends in consonant + "le"; at least 1.
pub fn count_syllables(word: &str) -> usize {
    let w: Vec<char> = word.chars().filter(|c| c.is_alphabetic()).flat_map(char::to_lowercase).collect();
    if w.is_empty() {
        return 0;
    }
    let mut groups = 0;
    let mut prev_vowel = false;
    for &c in &w {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = w.len();
    if n >= 2 && w[n - 1] == 'e' && !is_vowel(w[n - 2]) {
        let consonant_le = n >= 3 && w[n - 2] == 'l' && !is_vowel(w[n - 3]);
        if !consonant_le {
            groups -= 1;
        }
    }
    groups.max(1)
}

/// Whitespace tokens containing at least one letter.
pub fn words(text: &str) -> Vec<&str> {
    text.split_whitespace().filter(|t| t.chars().any(char::is_alphabetic)).collect()
}

/// Runs of `.`, `!` or `?`, at least 1.
pub fn count_sentences(text: &str) -> usize {
    let mut runs = 0;
    let mut in_run = false;
    for c in text.chars() {
        let t = matches!(c, '.' | '!' | '?');
        if t && !in_run {
            runs += 1;
        }
        in_run = t;
    }
    runs.max(1)
}

pub fn fres(text: &str) -> Result<ReadabilityStats, EvalError> {
    let ws = words(text);
    if ws.is_empty() {
        return Err(EvalError::NoWords);
    }
    let total_syllables = ws.iter().map(|w| count_syllables(w)).sum();
    let total_sentences = count_sentences(text);
    let score = flesch(ws.len(), total_sentences, total_syllables);
    Ok(ReadabilityStats {
        total_words: ws.len(),
        total_sentences,
        total_syllables,
        fres: score,
        band: interpret_fres(score).to_string(),
    })
}
