//! Lexical diversity and vocabulary composition.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phonetics::{syllable_count, Dictionaries};
use crate::text::{content_lines, split_pair};

pub const DEFAULT_TTR_WINDOW: usize = 100;
pub const DEFAULT_RARE_CUTOFF: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexicalConfig {
    pub ttr_window: usize,
    pub rare_cutoff: f64,
}

impl Default for LexicalConfig {
    fn default() -> Self {
        LexicalConfig {
            ttr_window: DEFAULT_TTR_WINDOW,
            rare_cutoff: DEFAULT_RARE_CUTOFF,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LexicalFeatures {
    pub ttr_windowed: f64,
    pub vocab_size: usize,
    pub rare_word_rate: f64,
    pub mean_word_length: f64,
    pub mean_syllables_per_word: f64,
    pub slang_rate: f64,
}

/// Relative word frequencies from a reference corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrequencyTable {
    freqs: HashMap<String, f64>,
}

impl FrequencyTable {
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut freqs = HashMap::new();
        let mut total = 0.0;
        for (w, f) in entries {
            let w = w.into();
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::param(format!("frequency of `{w}` is {f}, outside (0, 1]")));
            }
            total += f;
            freqs.insert(w.to_lowercase(), f);
        }
        if total > 1.0 + 1e-9 {
            return Err(Error::param(format!("frequencies sum to {total} > 1")));
        }
        Ok(FrequencyTable { freqs })
    }

    /// Reads `word<TAB>relative_frequency` lines; `#` lines are comments.
    pub fn from_tsv(path: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (line_no, line) in content_lines(path)? {
            let (w, f) = split_pair(path, line_no, &line)?;
            let f: f64 = f.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line_no,
                reason: format!("`{f}` is not a number"),
            })?;
            entries.push((w.trim().to_string(), f));
        }
        Self::new(entries)
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.freqs.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }
}

/// Loads a one-word-per-line lexicon; `#` lines are comments.
pub fn load_word_set(path: &Path) -> Result<HashSet<String>> {
    Ok(content_lines(path)?
        .into_iter()
        .map(|(_, l)| l.trim().to_lowercase())
        .collect())
}

fn require_tokens<S: AsRef<str>>(tokens: &[S]) -> Result<()> {
    if tokens.is_empty() {
        Err(Error::Precondition("token list is empty".into()))
    } else {
        Ok(())
    }
}

fn ttr<S: AsRef<str>>(seg: &[S]) -> f64 {
    let distinct: HashSet<&str> = seg.iter().map(AsRef::as_ref).collect();
    distinct.len() as f64 / seg.len() as f64
}

/// Mean type-token ratio over consecutive `window`-token segments. A
/// trailing partial segment counts only when it holds at least half a
/// window, unless it is the only segment.
pub fn windowed_ttr<S: AsRef<str>>(tokens: &[S], window: usize) -> Result<f64> {
    require_tokens(tokens)?;
    if window == 0 {
        return Err(Error::param("window must be >= 1"));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for seg in tokens.chunks(window) {
        if seg.len() == window || n == 0 || 2 * seg.len() >= window {
            sum += ttr(seg);
            n += 1;
        }
    }
    Ok(sum / n as f64)
}

/// Share of tokens below `cutoff` in the reference table or absent from it.
pub fn rare_word_rate<S: AsRef<str>>(tokens: &[S], table: &FrequencyTable, cutoff: f64) -> Result<f64> {
    require_tokens(tokens)?;
    let rare = tokens
        .iter()
        .filter(|t| table.get(t.as_ref()).is_none_or(|f| f < cutoff))
        .count();
    Ok(rare as f64 / tokens.len() as f64)
}

pub fn slang_rate<S: AsRef<str>>(tokens: &[S], lexicon: &HashSet<String>) -> Result<f64> {
    require_tokens(tokens)?;
    let hits = tokens.iter().filter(|t| lexicon.contains(t.as_ref())).count();
    Ok(hits as f64 / tokens.len() as f64)
}

/// Mean characters per token and mean syllables per token.
pub fn word_shape_stats<S: AsRef<str>>(tokens: &[S], dicts: &Dictionaries) -> Result<(f64, f64)> {
    require_tokens(tokens)?;
    let n = tokens.len() as f64;
    let chars: usize = tokens.iter().map(|t| t.as_ref().chars().count()).sum();
    let mut cache: HashMap<&str, usize> = HashMap::new();
    let mut syllables = 0usize;
    for t in tokens {
        let t = t.as_ref();
        syllables += *cache.entry(t).or_insert_with(|| syllable_count(&dicts.lookup(t)));
    }
    Ok((chars as f64 / n, syllables as f64 / n))
}

pub fn lexical_features<S: AsRef<str>>(
    tokens: &[S],
    table: &FrequencyTable,
    slang: &HashSet<String>,
    dicts: &Dictionaries,
    cfg: &LexicalConfig,
) -> Result<LexicalFeatures> {
    let (mean_word_length, mean_syllables_per_word) = word_shape_stats(tokens, dicts)?;
    Ok(LexicalFeatures {
        ttr_windowed: windowed_ttr(tokens, cfg.ttr_window)?,
        vocab_size: tokens.iter().map(AsRef::as_ref).collect::<HashSet<&str>>().len(),
        rare_word_rate: rare_word_rate(tokens, table, cfg.rare_cutoff)?,
        mean_word_length,
        mean_syllables_per_word,
        slang_rate: slang_rate(tokens, slang)?,
    })
}
