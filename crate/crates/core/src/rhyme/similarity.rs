//! Syllable-aligned phonetic similarity between two pronunciation tails.
//!
//! A tail is split into syllables `(nucleus, coda)`: every vowel starts a
//! syllable and every consonant after it, up to the next vowel, forms its
//! coda. Consonants before the first vowel are ignored. The last `k`
//! syllables of both tails are aligned from the end and each aligned pair
//! scores `0.6 · nucleus + 0.4 · coda`; the similarity is the mean.

use super::RhymeConfig;
use crate::error::{Error, Result};
use crate::phonetics::{Arpabet, PhonemeSequence};

pub const NUCLEUS_WEIGHT: f64 = 0.6;
pub const CODA_WEIGHT: f64 = 0.4;

/// A stress-stripped syllable rime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rime {
    pub nucleus: Arpabet,
    pub coda: Vec<Arpabet>,
}

pub fn rimes(seq: &PhonemeSequence) -> Vec<Rime> {
    let mut out: Vec<Rime> = Vec::new();
    for p in seq.phones() {
        if p.is_vowel() {
            out.push(Rime {
                nucleus: p.base(),
                coda: Vec::new(),
            });
        } else if let Some(last) = out.last_mut() {
            last.coda.push(p.base());
        }
    }
    out
}

impl RhymeConfig {
    fn class_of(&self, a: Arpabet) -> Option<usize> {
        self.equivalence_classes.iter().position(|c| c.contains(&a))
    }

    /// Same class, different symbols.
    pub fn equivalent(&self, a: Arpabet, b: Arpabet) -> bool {
        a != b
            && self
                .equivalence_classes
                .iter()
                .any(|c| c.contains(&a) && c.contains(&b))
    }
}

fn nucleus_score(a: Arpabet, b: Arpabet, cfg: &RhymeConfig) -> f64 {
    if a == b {
        1.0
    } else if cfg.equivalent(a, b) {
        0.5
    } else {
        0.0
    }
}

/// Multiset coda match: identical consonants earn 1, equivalent ones 0.5,
/// a single unmatched extra consonant (present on one side, absent on the
/// other) earns 0.5 when final-consonant deletion is enabled. Normalised by
/// the longer coda.
fn coda_score(a: &[Arpabet], b: &[Arpabet], cfg: &RhymeConfig) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let mut ra: Vec<Arpabet> = a.to_vec();
    let mut rb: Vec<Arpabet> = b.to_vec();
    ra.sort();
    rb.sort();
    let mut exact = 0usize;
    let mut left_a = Vec::new();
    let mut left_b = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < ra.len() || j < rb.len() {
        match (ra.get(i), rb.get(j)) {
            (Some(x), Some(y)) if x == y => {
                exact += 1;
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                left_a.push(*x);
                i += 1;
            }
            (_, Some(y)) => {
                left_b.push(*y);
                j += 1;
            }
            (Some(x), None) => {
                left_a.push(*x);
                i += 1;
            }
            (None, None) => unreachable!(),
        }
    }

    let mut half = 0usize;
    let mut used = vec![false; left_b.len()];
    for x in &left_a {
        if let Some(class) = cfg.class_of(*x) {
            if let Some(pos) = left_b
                .iter()
                .enumerate()
                .position(|(k, y)| !used[k] && *y != *x && cfg.class_of(*y) == Some(class))
            {
                used[pos] = true;
                half += 1;
            }
        }
    }
    let unmatched = (left_a.len() - half) + (left_b.len() - half);
    let deletion = if cfg.final_consonant_deletion && unmatched == 1 {
        0.5
    } else {
        0.0
    };
    let n = a.len().max(b.len()) as f64;
    (exact as f64 + 0.5 * half as f64 + deletion) / n
}

/// Similarity of two syllables in `[0, 1]`.
pub fn rime_similarity(a: &Rime, b: &Rime, cfg: &RhymeConfig) -> f64 {
    NUCLEUS_WEIGHT * nucleus_score(a.nucleus, b.nucleus, cfg)
        + CODA_WEIGHT * coda_score(&a.coda, &b.coda, cfg)
}

/// Mean similarity over the last `k` aligned syllables of two rime lists.
pub fn rimes_similarity(a: &[Rime], b: &[Rime], k: usize, cfg: &RhymeConfig) -> Result<f64> {
    if k == 0 {
        return Err(Error::Precondition("span k must be >= 1".into()));
    }
    if a.len() < k || b.len() < k {
        return Err(Error::Precondition(format!(
            "tails have {} and {} syllables, fewer than k = {k}",
            a.len(),
            b.len()
        )));
    }
    let total: f64 = a[a.len() - k..]
        .iter()
        .zip(&b[b.len() - k..])
        .map(|(x, y)| rime_similarity(x, y, cfg))
        .sum();
    Ok(total / k as f64)
}

/// Phonetic similarity of the last `k` syllables of two tails.
pub fn phonetic_similarity(
    tail_a: &PhonemeSequence,
    tail_b: &PhonemeSequence,
    k: usize,
    cfg: &RhymeConfig,
) -> Result<f64> {
    rimes_similarity(&rimes(tail_a), &rimes(tail_b), k, cfg)
}
