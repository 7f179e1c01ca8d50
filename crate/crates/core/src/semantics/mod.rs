//! Topic modelling, coherence and thematic diversity.

mod coherence;
mod lda;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub use coherence::{coherence_cv, coherence_of_lists, CoherenceReport, WindowCounts, DEFAULT_TOP_N, DEFAULT_WINDOW};
pub use lda::{build_vocabulary, fit_lda, read_matrix_sidecar, LdaConfig, ModelSummary, TopicModel, TopicSummary, TRACE_EVERY};

/// Shannon entropy in nats, with `0 · ln 0 = 0`.
pub fn topic_entropy(dist: &[f64]) -> Result<f64> {
    if let Some(i) = dist.iter().position(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::param(format!("probability {} at index {i}", dist[i])));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("distribution sums to {sum}, not 1")));
    }
    // 0 − s rather than −s so a point mass gives +0
    Ok(0.0 - dist.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearchResult {
    pub best_k: usize,
    /// `(K, mean coherence)` for every K in the range, ascending.
    pub scores: Vec<(usize, f64)>,
}

/// Default coherence gap below which a smaller K is preferred.
pub const DEFAULT_K_TOLERANCE: f64 = 0.01;

/// Fits one model per K in `k_min..=k_max` with the template's seed and
/// returns the smallest K whose mean CV coherence is within `tolerance` of
/// the best score. Surplus topics beyond the true count tend to be empty or
/// to duplicate real ones, so coherence plateaus rather than drops past the
/// right K; `tolerance = 0` gives the plain argmax.
pub fn grid_search_k<S: AsRef<str> + Sync>(
    docs: &[Vec<S>],
    k_min: usize,
    k_max: usize,
    template: &LdaConfig,
    top_n: usize,
    window: usize,
    tolerance: f64,
) -> Result<GridSearchResult> {
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(Error::param("tolerance must be a nonnegative number"));
    }
    let v = build_vocabulary(docs).len();
    if k_min < 1 || k_min > k_max || k_max > v {
        return Err(Error::param(format!(
            "K range [{k_min}, {k_max}] outside [1, {v}]"
        )));
    }
    let scores: Vec<(usize, f64)> = (k_min..=k_max)
        .into_par_iter()
        .map(|k| {
            let cfg = LdaConfig {
                num_topics: k,
                ..template.clone()
            };
            let wrap = |e| Error::Fit {
                k,
                source: Box::new(e),
            };
            let model = fit_lda(docs, &cfg).map_err(wrap)?;
            let report = coherence_cv(&model, docs, top_n.min(v), window).map_err(wrap)?;
            Ok((k, report.mean))
        })
        .collect::<Result<_>>()?;
    let top = scores.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let best_k = scores
        .iter()
        .find(|s| s.1 >= top - tolerance)
        .expect("range is nonempty")
        .0;
    Ok(GridSearchResult { best_k, scores })
}
