//! Lexicon sentiment scoring and emotional-arc classification.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{content_lines, split_pair};

/// Word → valence in `[-1, 1]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    valences: HashMap<String, f64>,
}

impl SentimentLexicon {
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut valences = HashMap::new();
        for (w, v) in entries {
            let w = w.into();
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::param(format!("valence of `{w}` is {v}, outside [-1, 1]")));
            }
            valences.insert(w.to_lowercase(), v);
        }
        Ok(SentimentLexicon { valences })
    }

    /// Reads `word<TAB>valence` lines; `#` lines are comments.
    pub fn from_tsv(path: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (line_no, line) in content_lines(path)? {
            let (w, v) = split_pair(path, line_no, &line)?;
            let v: f64 = v.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line_no,
                reason: format!("`{v}` is not a number"),
            })?;
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line_no,
                    reason: format!("valence {v} outside [-1, 1]"),
                });
            }
            entries.push((w.to_string(), v));
        }
        Self::new(entries)
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.valences.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    pub fn max_abs_valence(&self) -> f64 {
        self.valences.values().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Anything that can turn tokens into `(polarity, coverage)`. The lexicon
/// is the built-in implementation; an external model can be plugged in.
pub trait SentimentScorer {
    fn score_tokens(&self, tokens: &[&str]) -> (f64, f64);
}

impl SentimentScorer for SentimentLexicon {
    fn score_tokens(&self, tokens: &[&str]) -> (f64, f64) {
        score(tokens, self)
    }
}

/// Mean valence over tokens found in the lexicon, and the share of tokens
/// found. No hits gives `(0, 0)`.
pub fn score<S: AsRef<str>>(tokens: &[S], lexicon: &SentimentLexicon) -> (f64, f64) {
    let hits: Vec<f64> = tokens.iter().filter_map(|t| lexicon.get(t.as_ref())).collect();
    if hits.is_empty() {
        return (0.0, 0.0);
    }
    let polarity = hits.iter().sum::<f64>() / hits.len() as f64;
    (polarity, hits.len() as f64 / tokens.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arc {
    Consistent,
    Declining,
    Rising,
    Complex,
}

impl Arc {
    pub fn as_str(self) -> &'static str {
        match self {
            Arc::Consistent => "consistent",
            Arc::Declining => "declining",
            Arc::Rising => "rising",
            Arc::Complex => "complex",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArcConfig {
    pub segments: usize,
    /// Below this population std the arc is flat.
    pub tau_flat: f64,
    /// Minimum |slope| per segment step for a trend.
    pub tau_slope: f64,
    /// Minimum R² of the linear fit for a trend.
    pub min_r2: f64,
}

impl Default for ArcConfig {
    fn default() -> Self {
        ArcConfig {
            segments: 10,
            tau_flat: 0.05,
            tau_slope: 0.02,
            min_r2: 0.5,
        }
    }
}

impl ArcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.segments < 2 {
            return Err(Error::param("arc segments must be >= 2"));
        }
        if !(self.tau_flat >= 0.0 && self.tau_slope >= 0.0 && (0.0..=1.0).contains(&self.min_r2)) {
            return Err(Error::param("arc thresholds must be nonnegative and min_r2 in [0, 1]"));
        }
        Ok(())
    }
}

/// Least-squares slope against `0..n`, and the fit's R² (1 for a flat series).
pub fn linear_trend(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (v - my);
        sxx += dx * dx;
        syy += (v - my) * (v - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { slope * slope * sxx / syy };
    (slope, r2)
}

fn population_std(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt()
}

/// Flat if the segment std is below `tau_flat`; otherwise a trend when the
/// fitted slope clears `tau_slope` and the line explains at least `min_r2`
/// of the variance; anything else is complex.
pub fn emotional_arc(per_segment: &[f64], cfg: &ArcConfig) -> Result<Arc> {
    if per_segment.len() < 2 {
        return Err(Error::param(format!(
            "arc needs at least 2 segments, got {}",
            per_segment.len()
        )));
    }
    if population_std(per_segment) < cfg.tau_flat {
        return Ok(Arc::Consistent);
    }
    let (slope, r2) = linear_trend(per_segment);
    Ok(if r2 < cfg.min_r2 {
        Arc::Complex
    } else if slope <= -cfg.tau_slope {
        Arc::Declining
    } else if slope >= cfg.tau_slope {
        Arc::Rising
    } else {
        Arc::Complex
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentimentProfile {
    pub song_polarity: f64,
    pub per_line: Vec<f64>,
    pub per_segment: Vec<f64>,
    pub variability: f64,
    pub coverage: f64,
    pub arc: Arc,
}

/// Splits `weights.len()` items into `n` contiguous nonempty groups with
/// roughly equal total weight. Returns group end indices (exclusive).
fn balanced_bounds(weights: &[usize], n: usize) -> Vec<usize> {
    let total: usize = weights.iter().sum();
    let mut bounds = Vec::with_capacity(n);
    let mut start = 0;
    let mut acc = 0usize;
    for s in 0..n {
        let remaining_groups = n - s - 1;
        let max_end = weights.len() - remaining_groups;
        let target = total * (s + 1);
        let mut end = start + 1;
        acc += weights[start];
        while end < max_end && acc * n < target {
            acc += weights[end];
            end += 1;
        }
        bounds.push(end);
        start = end;
    }
    bounds
}

/// Per-line, per-segment and whole-song sentiment. Segments group whole
/// lines so that each carries about the same number of tokens; a segment's
/// score is the token-weighted mean of its line scores.
pub fn profile_song<S: AsRef<str>>(
    lines: &[S],
    scorer: &dyn SentimentScorer,
    cfg: &ArcConfig,
) -> Result<SentimentProfile> {
    cfg.validate()?;
    if lines.is_empty() {
        return Err(Error::Precondition("song has no lines".into()));
    }
    let line_tokens: Vec<Vec<&str>> = lines.iter().map(|l| l.as_ref().split_whitespace().collect()).collect();
    let per_line: Vec<f64> = line_tokens.iter().map(|t| scorer.score_tokens(t).0).collect();
    let all: Vec<&str> = line_tokens.iter().flatten().copied().collect();
    let (song_polarity, coverage) = scorer.score_tokens(&all);

    let weights: Vec<usize> = line_tokens.iter().map(|t| t.len().max(1)).collect();
    let n = cfg.segments.min(lines.len());
    let mut per_segment = Vec::with_capacity(n);
    let mut start = 0;
    for end in balanced_bounds(&weights, n) {
        let w: usize = weights[start..end].iter().sum();
        let s: f64 = (start..end).map(|i| weights[i] as f64 * per_line[i]).sum();
        per_segment.push(s / w as f64);
        start = end;
    }
    let arc = if per_segment.len() < 2 {
        Arc::Consistent
    } else {
        emotional_arc(&per_segment, cfg)?
    };
    Ok(SentimentProfile {
        song_polarity,
        variability: population_std(&per_line),
        per_line,
        per_segment,
        coverage,
        arc,
    })
}
