//! Collapsed Gibbs sampling for LDA with symmetric Dirichlet priors.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Iterations between log-likelihood samples.
pub const TRACE_EVERY: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaConfig {
    pub num_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            num_topics: 15,
            alpha: 0.1,
            beta: 0.01,
            iterations: 1000,
            seed: 0,
        }
    }
}

impl LdaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_topics < 1 {
            return Err(Error::param("num_topics must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite() && self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::param("alpha and beta must be positive"));
        }
        if self.iterations < 1 {
            return Err(Error::param("iterations must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicModel {
    pub vocabulary: Vec<String>,
    /// K rows over the vocabulary.
    pub topic_word: Vec<Vec<f64>>,
    /// D rows over topics.
    pub doc_topic: Vec<Vec<f64>>,
    /// Joint log-likelihood `log p(w, z)` after initialisation and every
    /// [`TRACE_EVERY`] sweeps.
    pub log_likelihood_trace: Vec<f64>,
    pub config: LdaConfig,
}

struct Counts {
    k: usize,
    v: usize,
    n_kw: Vec<u32>,
    n_k: Vec<u32>,
    n_dk: Vec<u32>,
    n_d: Vec<u32>,
}

impl Counts {
    fn log_likelihood(&self, alpha: f64, beta: f64) -> f64 {
        let (k, v) = (self.k as f64, self.v as f64);
        let d = self.n_d.len() as f64;
        let mut ll = k * (ln_gamma(v * beta) - v * ln_gamma(beta));
        for t in 0..self.k {
            ll += self.n_kw[t * self.v..(t + 1) * self.v]
                .iter()
                .map(|&n| ln_gamma(n as f64 + beta))
                .sum::<f64>();
            ll -= ln_gamma(self.n_k[t] as f64 + v * beta);
        }
        ll += d * (ln_gamma(k * alpha) - k * ln_gamma(alpha));
        for (di, &nd) in self.n_d.iter().enumerate() {
            ll += self.n_dk[di * self.k..(di + 1) * self.k]
                .iter()
                .map(|&n| ln_gamma(n as f64 + alpha))
                .sum::<f64>();
            ll -= ln_gamma(nd as f64 + k * alpha);
        }
        ll
    }
}

/// Sorted vocabulary of all tokens in `docs`.
pub fn build_vocabulary<S: AsRef<str>>(docs: &[Vec<S>]) -> Vec<String> {
    let set: BTreeSet<&str> = docs.iter().flatten().map(AsRef::as_ref).collect();
    set.into_iter().map(str::to_string).collect()
}

pub fn fit_lda<S: AsRef<str>>(docs: &[Vec<S>], cfg: &LdaConfig) -> Result<TopicModel> {
    cfg.validate()?;
    if docs.is_empty() {
        return Err(Error::Precondition("no documents".into()));
    }
    if let Some(i) = docs.iter().position(Vec::is_empty) {
        return Err(Error::EmptyDocument(i));
    }
    let total: usize = docs.iter().map(Vec::len).sum();
    if cfg.num_topics > total {
        return Err(Error::param(format!(
            "K = {} exceeds the {total} corpus tokens",
            cfg.num_topics
        )));
    }
    let vocabulary = build_vocabulary(docs);
    let words: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| {
            d.iter()
                .map(|w| vocabulary.binary_search_by(|v| v.as_str().cmp(w.as_ref())).expect("in vocabulary"))
                .collect()
        })
        .collect();

    let (k, v) = (cfg.num_topics, vocabulary.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut c = Counts {
        k,
        v,
        n_kw: vec![0; k * v],
        n_k: vec![0; k],
        n_dk: vec![0; docs.len() * k],
        n_d: words.iter().map(|d| d.len() as u32).collect(),
    };
    let mut z: Vec<Vec<usize>> = Vec::with_capacity(words.len());
    for (d, doc) in words.iter().enumerate() {
        let zd: Vec<usize> = doc.iter().map(|_| rng.random_range(0..k)).collect();
        for (&w, &t) in doc.iter().zip(&zd) {
            c.n_kw[t * v + w] += 1;
            c.n_k[t] += 1;
            c.n_dk[d * k + t] += 1;
        }
        z.push(zd);
    }

    let vbeta = v as f64 * cfg.beta;
    let mut trace = vec![c.log_likelihood(cfg.alpha, cfg.beta)];
    let mut p = vec![0.0f64; k];
    for iter in 1..=cfg.iterations {
        for (d, doc) in words.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = z[d][i];
                c.n_kw[old * v + w] -= 1;
                c.n_k[old] -= 1;
                c.n_dk[d * k + old] -= 1;
                let mut acc = 0.0;
                for t in 0..k {
                    acc += (c.n_dk[d * k + t] as f64 + cfg.alpha) * (c.n_kw[t * v + w] as f64 + cfg.beta)
                        / (c.n_k[t] as f64 + vbeta);
                    p[t] = acc;
                }
                let u = rng.random::<f64>() * acc;
                let new = p.iter().position(|&x| u < x).unwrap_or(k - 1);
                z[d][i] = new;
                c.n_kw[new * v + w] += 1;
                c.n_k[new] += 1;
                c.n_dk[d * k + new] += 1;
            }
        }
        if iter % TRACE_EVERY == 0 {
            trace.push(c.log_likelihood(cfg.alpha, cfg.beta));
        }
    }

    let topic_word = (0..k)
        .map(|t| {
            let den = c.n_k[t] as f64 + vbeta;
            (0..v).map(|w| (c.n_kw[t * v + w] as f64 + cfg.beta) / den).collect()
        })
        .collect();
    let kalpha = k as f64 * cfg.alpha;
    let doc_topic = (0..docs.len())
        .map(|d| {
            let den = c.n_d[d] as f64 + kalpha;
            (0..k).map(|t| (c.n_dk[d * k + t] as f64 + cfg.alpha) / den).collect()
        })
        .collect();
    Ok(TopicModel {
        vocabulary,
        topic_word,
        doc_topic,
        log_likelihood_trace: trace,
        config: cfg.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicSummary {
    pub topic: usize,
    pub top_words: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary<'a> {
    pub config: &'a LdaConfig,
    pub vocabulary: &'a [String],
    pub topics: Vec<TopicSummary>,
    pub doc_topic: &'a [Vec<f64>],
    pub log_likelihood_trace: &'a [f64],
    pub trace_every: usize,
}

impl TopicModel {
    pub fn num_topics(&self) -> usize {
        self.topic_word.len()
    }

    /// Indices of the `n` most probable words of topic `k`; ties go to the
    /// earlier vocabulary entry.
    pub fn top_word_ids(&self, k: usize, n: usize) -> Vec<usize> {
        let row = &self.topic_word[k];
        let mut ids: Vec<usize> = (0..row.len()).collect();
        ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        ids.truncate(n);
        ids
    }

    pub fn top_words(&self, k: usize, n: usize) -> Vec<(String, f64)> {
        self.top_word_ids(k, n)
            .into_iter()
            .map(|w| (self.vocabulary[w].clone(), self.topic_word[k][w]))
            .collect()
    }

    /// Whether the mean of the last 10% of the trace is at least the mean
    /// of the first 10%.
    pub fn trace_improved(&self) -> bool {
        let t = &self.log_likelihood_trace;
        let m = (t.len() / 10).max(1);
        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        mean(&t[t.len() - m..]) >= mean(&t[..m])
    }

    pub fn summary(&self, top_n: usize) -> ModelSummary<'_> {
        ModelSummary {
            config: &self.config,
            vocabulary: &self.vocabulary,
            topics: (0..self.num_topics())
                .map(|k| TopicSummary {
                    topic: k,
                    top_words: self.top_words(k, top_n),
                })
                .collect(),
            doc_topic: &self.doc_topic,
            log_likelihood_trace: &self.log_likelihood_trace,
            trace_every: TRACE_EVERY,
        }
    }

    /// Writes `topic_word` as K·V little-endian `f64`, row-major.
    pub fn write_topic_word_sidecar(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        for row in &self.topic_word {
            for x in row {
                w.write_all(&x.to_le_bytes()).map_err(|e| Error::io(path, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Reads a `[K][V]` little-endian `f64` sidecar.
pub fn read_matrix_sidecar(path: &Path, rows: usize, cols: usize) -> Result<Vec<Vec<f64>>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(f).read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    if bytes.len() != rows * cols * 8 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line_no: 0,
            reason: format!("expected {} bytes, found {}", rows * cols * 8, bytes.len()),
        });
    }
    Ok(bytes
        .chunks_exact(cols * 8)
        .map(|r| {
            r.chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect()
        })
        .collect())
}
