//! CV topic coherence.
//!
//! Every document is cut into boolean sliding windows of `window` tokens
//! (a shorter document is a single window). Word and pair probabilities are
//! window frequencies. For the top words `W` of a topic, each word `w` gets
//! the confirmation vector `v(w) = [NPMI(w, u) for u in W]`; the topic
//! score is the mean cosine between `v(w)` and `Σ_u v(u)`.
//!
//! NPMI conventions: a word that never occurs, or a zero-norm vector,
//! contributes 0; a pair that never co-occurs scores −1; a pair present in
//! every window scores 1.

use std::collections::HashMap;

use serde::Serialize;

use super::lda::TopicModel;
use crate::error::{Error, Result};

pub const DEFAULT_TOP_N: usize = 10;
pub const DEFAULT_WINDOW: usize = 110;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceReport {
    pub per_topic: Vec<f64>,
    pub mean: f64,
    pub window: usize,
    pub top_n: usize,
}

/// Window occurrence counts for a fixed word set.
pub struct WindowCounts {
    index: HashMap<String, usize>,
    single: Vec<u64>,
    pair: Vec<u64>,
    windows: u64,
}

impl WindowCounts {
    pub fn new<S: AsRef<str>>(docs: &[Vec<S>], words: &[String], window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::param("coherence window must be >= 1"));
        }
        let mut index = HashMap::new();
        for w in words {
            let next = index.len();
            index.entry(w.clone()).or_insert(next);
        }
        let n = index.len();
        let mut single = vec![0u64; n];
        let mut pair = vec![0u64; n * n];
        let mut windows = 0u64;
        let mut count = vec![0u32; n];
        for doc in docs {
            let ids: Vec<Option<usize>> = doc.iter().map(|t| index.get(t.as_ref()).copied()).collect();
            if ids.is_empty() {
                continue;
            }
            let w = window.min(ids.len());
            count.iter_mut().for_each(|c| *c = 0);
            for id in ids[..w].iter().flatten() {
                count[*id] += 1;
            }
            for start in 0..=ids.len() - w {
                if start > 0 {
                    if let Some(out) = ids[start - 1] {
                        count[out] -= 1;
                    }
                    if let Some(inc) = ids[start + w - 1] {
                        count[inc] += 1;
                    }
                }
                windows += 1;
                let present: Vec<usize> = (0..n).filter(|&i| count[i] > 0).collect();
                for (a, &i) in present.iter().enumerate() {
                    single[i] += 1;
                    for &j in &present[a + 1..] {
                        pair[i * n + j] += 1;
                        pair[j * n + i] += 1;
                    }
                }
            }
        }
        Ok(WindowCounts {
            index,
            single,
            pair,
            windows,
        })
    }

    pub fn windows(&self) -> u64 {
        self.windows
    }

    fn p(&self, i: usize) -> f64 {
        self.single[i] as f64 / self.windows as f64
    }

    fn p2(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.p(i)
        } else {
            self.pair[i * self.single.len() + j] as f64 / self.windows as f64
        }
    }

    pub fn npmi(&self, a: &str, b: &str) -> f64 {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.npmi_ids(i, j),
            _ => 0.0,
        }
    }

    fn npmi_ids(&self, i: usize, j: usize) -> f64 {
        if self.windows == 0 {
            return 0.0;
        }
        let (pi, pj, pij) = (self.p(i), self.p(j), self.p2(i, j));
        if pi == 0.0 || pj == 0.0 {
            0.0
        } else if pij == 0.0 {
            -1.0
        } else if pij >= 1.0 {
            1.0
        } else {
            (pij / (pi * pj)).ln() / -pij.ln()
        }
    }

    /// Coherence of one word list.
    pub fn cv(&self, words: &[String]) -> f64 {
        let ids: Vec<usize> = words.iter().map(|w| self.index[w]).collect();
        let vectors: Vec<Vec<f64>> = ids
            .iter()
            .map(|&i| ids.iter().map(|&j| self.npmi_ids(i, j)).collect())
            .collect();
        let m = ids.len();
        let sum: Vec<f64> = (0..m).map(|c| vectors.iter().map(|v| v[c]).sum()).collect();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ns = norm(&sum);
        let total: f64 = vectors
            .iter()
            .map(|v| {
                let nv = norm(v);
                if nv == 0.0 || ns == 0.0 {
                    0.0
                } else {
                    (v.iter().zip(&sum).map(|(a, b)| a * b).sum::<f64>() / (nv * ns)).clamp(-1.0, 1.0)
                }
            })
            .sum();
        total / m as f64
    }
}

/// Coherence of explicit topic word lists against `docs`.
pub fn coherence_of_lists<S: AsRef<str>>(
    topics: &[Vec<String>],
    docs: &[Vec<S>],
    window: usize,
) -> Result<Vec<f64>> {
    let all: Vec<String> = topics.iter().flatten().cloned().collect();
    let counts = WindowCounts::new(docs, &all, window)?;
    Ok(topics.iter().map(|t| counts.cv(t)).collect())
}

pub fn coherence_cv<S: AsRef<str>>(
    model: &TopicModel,
    docs: &[Vec<S>],
    top_n: usize,
    window: usize,
) -> Result<CoherenceReport> {
    if top_n == 0 || top_n > model.vocabulary.len() {
        return Err(Error::param(format!(
            "top_n = {top_n} outside [1, {}]",
            model.vocabulary.len()
        )));
    }
    let topics: Vec<Vec<String>> = (0..model.num_topics())
        .map(|k| model.top_words(k, top_n).into_iter().map(|(w, _)| w).collect())
        .collect();
    let per_topic = coherence_of_lists(&topics, docs, window)?;
    let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    Ok(CoherenceReport {
        per_topic,
        mean,
        window,
        top_n,
    })
}
