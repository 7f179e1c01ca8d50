//! Rhyme detection over cleaned lyric lines.
//!
//! Every line is compared with the `window` lines before it. The line's
//! tail is the shortest run of final tokens that reaches `max_span`
//! syllables (or the whole line). The rhyme score of a line pair is the
//! best [`phonetic_similarity`] over spans `k = 1..=max_span`; a pair is
//! kept when the score exceeds `threshold`, and its span is the largest `k`
//! whose similarity reaches the threshold. Internal rhymes compare the
//! distinct stressed words of a single line pairwise and are stored with
//! `line_i == line_j`.

mod eval;
mod similarity;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phonetics::{syllable_count, Arpabet, Dictionaries, PhonemeSequence};

pub use eval::{evaluate, load_annotations, AnnotatedVerse, EvalReport, GoldPair};
pub use similarity::{phonetic_similarity, rime_similarity, rimes, rimes_similarity, Rime, CODA_WEIGHT, NUCLEUS_WEIGHT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RhymeConfig {
    pub threshold: f64,
    pub window: usize,
    pub max_span: usize,
    #[serde(with = "classes_serde")]
    pub equivalence_classes: Vec<Vec<Arpabet>>,
    /// A lone extra consonant on one side earns half coda credit.
    pub final_consonant_deletion: bool,
}

impl Default for RhymeConfig {
    fn default() -> Self {
        use Arpabet::*;
        RhymeConfig {
            threshold: 0.7,
            window: 10,
            max_span: 4,
            equivalence_classes: vec![vec![AH, ER], vec![IH, IY], vec![T, D], vec![S, Z], vec![M, N]],
            final_consonant_deletion: true,
        }
    }
}

impl RhymeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::param(format!("threshold {} not in (0, 1]", self.threshold)));
        }
        if self.window < 1 {
            return Err(Error::param("window must be >= 1"));
        }
        if self.max_span < 1 {
            return Err(Error::param("max_span must be >= 1"));
        }
        let mut seen = Vec::new();
        for class in &self.equivalence_classes {
            for a in class {
                if seen.contains(a) {
                    return Err(Error::param(format!("phoneme {a} appears in two equivalence classes")));
                }
                seen.push(*a);
            }
        }
        Ok(())
    }
}

mod classes_serde {
    use super::Arpabet;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<Arpabet>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|c| c.iter().map(|a| a.symbol()).collect::<Vec<_>>()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Arpabet>>, D::Error> {
        let raw: Vec<Vec<String>> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|c| {
                c.iter()
                    .map(|s| s.parse::<Arpabet>().map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

/// A detected rhyme. Line indices are 0-based; internal rhymes have
/// `line_i == line_j` and carry the word positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhymePair {
    pub line_i: usize,
    pub line_j: usize,
    pub score: f64,
    pub span: usize,
    pub end_rhyme: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub words: Option<(usize, usize)>,
}

impl RhymePair {
    pub fn is_internal(&self) -> bool {
        self.line_i == self.line_j
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhymeAnalysis {
    pub pairs: Vec<RhymePair>,
    pub line_count: usize,
    /// Cross-line pairs per line.
    pub density_pairs: f64,
    /// Matched syllables of cross-line pairs per line.
    pub density_syllables: f64,
    pub internal_per_line: f64,
    pub multisyllabic_fraction: f64,
    pub end_rhyme_fraction: f64,
}

impl RhymeAnalysis {
    fn from_pairs(pairs: Vec<RhymePair>, line_count: usize) -> Self {
        let cross: Vec<&RhymePair> = pairs.iter().filter(|p| !p.is_internal()).collect();
        let internal = pairs.len() - cross.len();
        let per_line = |x: f64| if line_count == 0 { 0.0 } else { x / line_count as f64 };
        let frac = |n: usize| if pairs.is_empty() { 0.0 } else { n as f64 / pairs.len() as f64 };
        RhymeAnalysis {
            density_pairs: per_line(cross.len() as f64),
            density_syllables: per_line(cross.iter().map(|p| p.span as f64).sum()),
            internal_per_line: per_line(internal as f64),
            multisyllabic_fraction: frac(pairs.iter().filter(|p| p.span >= 3).count()),
            end_rhyme_fraction: frac(pairs.iter().filter(|p| p.end_rhyme).count()),
            line_count,
            pairs,
        }
    }

    pub fn cross_line_pairs(&self) -> impl Iterator<Item = &RhymePair> {
        self.pairs.iter().filter(|p| !p.is_internal())
    }
}

/// Token pronunciations and syllable rimes for one line.
struct LineInfo {
    words: Vec<String>,
    word_rimes: Vec<Vec<Rime>>,
    /// Whether each word carries primary or secondary stress.
    word_stressed: Vec<bool>,
    /// Rimes of the line tail.
    tail: Vec<Rime>,
    /// Whether the final token contributes a syllable to the tail.
    final_token_voiced: bool,
}

/// Builds a token → pronunciation map for all tokens of `lines`.
pub fn phonetic_map(lines: &[String], dicts: &Dictionaries) -> HashMap<String, PhonemeSequence> {
    let mut map = HashMap::new();
    for token in lines.iter().flat_map(|l| l.split_whitespace()) {
        if !map.contains_key(token) {
            map.insert(token.to_string(), dicts.lookup(token));
        }
    }
    map
}

fn line_info(line: &str, map: &HashMap<String, PhonemeSequence>, max_span: usize) -> LineInfo {
    let words: Vec<String> = line.split_whitespace().map(str::to_string).collect();
    let prons: Vec<&PhonemeSequence> = words.iter().map(|w| &map[w]).collect();
    let mut start = words.len();
    let mut syllables = 0;
    while start > 0 && syllables < max_span {
        start -= 1;
        syllables += syllable_count(prons[start]);
    }
    let tail_seq = PhonemeSequence::concat(prons[start..].iter().copied());
    LineInfo {
        word_rimes: prons.iter().map(|p| rimes(p)).collect(),
        word_stressed: prons
            .iter()
            .map(|p| p.phones().iter().any(|ph| matches!(ph.stress(), Some(1 | 2))))
            .collect(),
        tail: rimes(&tail_seq),
        final_token_voiced: prons.last().is_some_and(|p| syllable_count(p) > 0),
        words,
    }
}

/// Best score over `k = 1..=max_k` plus the largest `k` reaching the threshold.
fn best_alignment(a: &[Rime], b: &[Rime], cfg: &RhymeConfig) -> Option<(f64, usize)> {
    let max_k = cfg.max_span.min(a.len()).min(b.len());
    let mut best: Option<f64> = None;
    let mut span = 0;
    for k in 1..=max_k {
        let s = rimes_similarity(a, b, k, cfg).expect("k bounded by tail lengths");
        best = Some(best.map_or(s, |b: f64| b.max(s)));
        if s >= cfg.threshold {
            span = k;
        }
    }
    best.map(|s| (s, span))
}

/// Rhyme detection over cleaned lines.
pub fn detect_rhymes(lines: &[String], dicts: &Dictionaries, cfg: &RhymeConfig) -> Result<RhymeAnalysis> {
    cfg.validate()?;
    let map = phonetic_map(lines, dicts);
    let infos: Vec<LineInfo> = lines.iter().map(|l| line_info(l, &map, cfg.max_span)).collect();
    let mut pairs = Vec::new();
    for (i, li) in infos.iter().enumerate() {
        for (a, wa) in li.word_rimes.iter().enumerate() {
            for (b, wb) in li.word_rimes.iter().enumerate().skip(a + 1) {
                if li.words[a] == li.words[b] || !li.word_stressed[a] || !li.word_stressed[b] {
                    continue;
                }
                if let Some((score, span)) = best_alignment(wa, wb, cfg) {
                    if score > cfg.threshold {
                        pairs.push(RhymePair {
                            line_i: i,
                            line_j: i,
                            score,
                            span,
                            end_rhyme: false,
                            words: Some((a, b)),
                        });
                    }
                }
            }
        }
        for j in i.saturating_sub(cfg.window)..i {
            let lj = &infos[j];
            if let Some((score, span)) = best_alignment(&li.tail, &lj.tail, cfg) {
                if score > cfg.threshold {
                    pairs.push(RhymePair {
                        line_i: i,
                        line_j: j,
                        score,
                        span,
                        end_rhyme: li.final_token_voiced && lj.final_token_voiced,
                        words: None,
                    });
                }
            }
        }
    }
    Ok(RhymeAnalysis::from_pairs(pairs, lines.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhymePositions {
    pub end_fraction: f64,
    pub distributed_fraction: f64,
    pub no_rhymes: bool,
}

/// Share of rhymes anchored at both line ends versus spread inside lines.
pub fn rhyme_positions(analysis: &RhymeAnalysis, lines: &[String]) -> Result<RhymePositions> {
    if analysis.line_count != lines.len() {
        return Err(Error::Precondition(format!(
            "analysis covers {} lines, got {}",
            analysis.line_count,
            lines.len()
        )));
    }
    if analysis.pairs.is_empty() {
        return Ok(RhymePositions {
            end_fraction: 0.0,
            distributed_fraction: 0.0,
            no_rhymes: true,
        });
    }
    let end = analysis.pairs.iter().filter(|p| p.end_rhyme && !p.is_internal()).count();
    let n = analysis.pairs.len();
    Ok(RhymePositions {
        end_fraction: end as f64 / n as f64,
        distributed_fraction: (n - end) as f64 / n as f64,
        no_rhymes: false,
    })
}
