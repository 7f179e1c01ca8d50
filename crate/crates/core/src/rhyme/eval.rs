//! Scoring detected cross-line rhymes against hand annotations.
//!
//! Annotation file: JSONL, one verse per line,
//! `{"id": "...", "lines": ["..."], "pairs": [[i, j, span], ...]}` with
//! 0-based line indices and `j < i`. Pair-level scores match on `(i, j)`;
//! syllable-level scores credit `min(span_pred, span_gold)` per matched
//! pair against the total predicted and gold spans.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{detect_rhymes, RhymeConfig};
use crate::error::{Error, Result};
use crate::phonetics::Dictionaries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldPair(pub usize, pub usize, pub usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedVerse {
    pub id: String,
    pub lines: Vec<String>,
    pub pairs: Vec<GoldPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub verses: usize,
    pub gold_pairs: usize,
    pub predicted_pairs: usize,
    pub true_positives: usize,
    pub pair_precision: f64,
    pub pair_recall: f64,
    pub syllable_precision: f64,
    pub syllable_recall: f64,
}

pub fn load_annotations(path: &Path) -> Result<Vec<AnnotatedVerse>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |reason: String| Error::Parse {
            path: path.to_path_buf(),
            line_no: idx + 1,
            reason,
        };
        let verse: AnnotatedVerse = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        for &GoldPair(i, j, span) in &verse.pairs {
            if j >= i || i >= verse.lines.len() || span == 0 {
                return Err(parse_err(format!("invalid pair [{i}, {j}, {span}] in verse {}", verse.id)));
            }
        }
        out.push(verse);
    }
    Ok(out)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn evaluate(verses: &[AnnotatedVerse], dicts: &Dictionaries, cfg: &RhymeConfig) -> Result<EvalReport> {
    let (mut gold_n, mut pred_n, mut tp) = (0, 0, 0);
    let (mut gold_syl, mut pred_syl, mut hit_syl) = (0, 0, 0);
    for verse in verses {
        let analysis = detect_rhymes(&verse.lines, dicts, cfg)?;
        let gold: BTreeMap<(usize, usize), usize> = verse.pairs.iter().map(|p| ((p.0, p.1), p.2)).collect();
        gold_n += gold.len();
        gold_syl += gold.values().sum::<usize>();
        for p in analysis.cross_line_pairs() {
            pred_n += 1;
            pred_syl += p.span;
            if let Some(&span) = gold.get(&(p.line_i, p.line_j)) {
                tp += 1;
                hit_syl += span.min(p.span);
            }
        }
    }
    Ok(EvalReport {
        verses: verses.len(),
        gold_pairs: gold_n,
        predicted_pairs: pred_n,
        true_positives: tp,
        pair_precision: ratio(tp, pred_n),
        pair_recall: ratio(tp, gold_n),
        syllable_precision: ratio(hit_syl, pred_syl),
        syllable_recall: ratio(hit_syl, gold_syl),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonetics::{DictSource, PronouncingDictionary};

    #[test]
    fn perfect_and_missed() {
        let (base, _) = PronouncingDictionary::parse_str(
            "cat K AE1 T\nhat HH AE1 T\ndog D AO1 G\nsun S AH1 N\n",
            DictSource::Base,
        );
        let dicts = Dictionaries::new(PronouncingDictionary::empty(DictSource::Slang), base);
        let verses = vec![AnnotatedVerse {
            id: "v".into(),
            lines: vec!["cat".into(), "hat".into(), "dog".into(), "sun".into()],
            pairs: vec![GoldPair(1, 0, 1), GoldPair(3, 2, 1)],
        }];
        let r = evaluate(&verses, &dicts, &RhymeConfig::default()).unwrap();
        assert_eq!(r.true_positives, 1);
        assert_eq!(r.pair_precision, 1.0);
        assert_eq!(r.pair_recall, 0.5);
        assert_eq!(r.syllable_recall, 0.5);
    }
}
