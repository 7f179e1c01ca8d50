//! Bayesian online changepoint detection with a constant hazard and a
//! Gaussian observation model under a Normal-Inverse-Gamma prior.
//!
//! `r_t = 0` means a new run starts at `t`, so `x_t` is the first
//! observation of that run and is scored by the prior predictive. With
//! `P_{t-1}` the run-length posterior after `t - 1` steps and `π_r` the
//! Student-t predictive of a run holding `r + 1` observations:
//!
//! ```text
//! P_t(0)     ∝ H · π_prior(x_t)
//! P_t(r + 1) ∝ (1 − H) · π_r(x_t) · P_{t-1}(r)
//! ```
//!
//! (Scoring a fresh run with the run-so-far predictive would make
//! `P_t(0) = H` at every step.)
//!
//! The changepoint score of step `t` is the posterior, `lag` steps later,
//! that the current run began at `t`: `P_{t+L}(L)` with
//! `L = min(lag, T − 1 − t)`. With `lag = 0` this is the real-time
//! `P_t(0)`. A few steps of look-ahead let the evidence after an ambiguous
//! first post-change point decide where the new run starts. A detection is
//! a step `t ≥ burn_in` whose score reaches the threshold and is the
//! largest such score within `± suppression` steps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BocpdConfig {
    /// Expected run length; the hazard is `1 / hazard_lambda` per step.
    pub hazard_lambda: f64,
    /// Prior mean; `None` uses the mean of the first five points.
    pub mu0: Option<f64>,
    pub kappa0: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub threshold: f64,
    pub burn_in: usize,
    pub suppression: usize,
    pub lag: usize,
}

impl Default for BocpdConfig {
    fn default() -> Self {
        BocpdConfig {
            hazard_lambda: 250.0,
            mu0: None,
            kappa0: 1.0,
            alpha0: 1.0,
            beta0: 1.0,
            threshold: 0.5,
            burn_in: 2,
            suppression: 2,
            lag: 5,
        }
    }
}

impl BocpdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.hazard_lambda > 1.0) {
            return Err(Error::param("hazard_lambda must be > 1"));
        }
        if !(self.kappa0 > 0.0 && self.alpha0 > 0.0 && self.beta0 > 0.0) {
            return Err(Error::param("kappa0, alpha0 and beta0 must be positive"));
        }
        if self.mu0.is_some_and(|m| !m.is_finite()) {
            return Err(Error::param("mu0 must be finite"));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::param("threshold must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub index: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangepointReport {
    pub detections: Vec<Detection>,
    /// Row `t` holds `P(r_t = r)` for `r = 0..=t`.
    #[serde(skip)]
    pub run_length_posterior: Vec<Vec<f64>>,
    /// `P(r_t = 0)` for every step.
    pub realtime_probability: Vec<f64>,
    /// Lagged score `P(r_{t+L} = L)` used for detection.
    pub changepoint_probability: Vec<f64>,
}

impl ChangepointReport {
    /// Writes the posterior as a row-major `T × T` little-endian `f64`
    /// matrix, zero above the diagonal.
    pub fn write_posterior_sidecar(&self, path: &Path) -> Result<()> {
        let t = self.run_length_posterior.len();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        for row in &self.run_length_posterior {
            for r in 0..t {
                let x = row.get(r).copied().unwrap_or(0.0);
                w.write_all(&x.to_le_bytes()).map_err(|e| Error::io(path, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy)]
struct Nig {
    mu: f64,
    kappa: f64,
    alpha: f64,
    beta: f64,
}

impl Nig {
    fn update(self, x: f64) -> Nig {
        let k1 = self.kappa + 1.0;
        Nig {
            mu: (self.kappa * self.mu + x) / k1,
            kappa: k1,
            alpha: self.alpha + 0.5,
            beta: self.beta + self.kappa * (x - self.mu).powi(2) / (2.0 * k1),
        }
    }

    fn ln_predictive(self, x: f64) -> f64 {
        let scale = (self.beta * (self.kappa + 1.0) / (self.alpha * self.kappa)).sqrt();
        StudentsT::new(self.mu, scale, 2.0 * self.alpha)
            .expect("positive parameters")
            .ln_pdf(x)
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Keeps candidates that are the strict maximum of their `± radius`
/// neighbourhood (the earliest wins among equals).
pub fn suppress(candidates: &[Detection], radius: usize) -> Vec<Detection> {
    candidates
        .iter()
        .filter(|c| {
            !candidates.iter().any(|o| {
                o.index != c.index
                    && o.index.abs_diff(c.index) <= radius
                    && (o.probability > c.probability || (o.probability == c.probability && o.index < c.index))
            })
        })
        .copied()
        .collect()
}

pub fn bocpd(series: &[f64], cfg: &BocpdConfig) -> Result<ChangepointReport> {
    cfg.validate()?;
    if let Some(i) = series.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if series.len() < 2 {
        return Err(Error::Precondition(format!(
            "series needs at least 2 points, got {}",
            series.len()
        )));
    }
    let head = &series[..series.len().min(5)];
    let prior = Nig {
        mu: cfg.mu0.unwrap_or(head.iter().sum::<f64>() / head.len() as f64),
        kappa: cfg.kappa0,
        alpha: cfg.alpha0,
        beta: cfg.beta0,
    };
    let ln_h = (1.0 / cfg.hazard_lambda).ln();
    let ln_1mh = (1.0 - 1.0 / cfg.hazard_lambda).ln();

    let mut posterior: Vec<Vec<f64>> = Vec::with_capacity(series.len());
    let mut ln_p = vec![0.0];
    let mut stats = vec![prior.update(series[0])];
    posterior.push(vec![1.0]);
    for &x in &series[1..] {
        let mut ln_joint = Vec::with_capacity(ln_p.len() + 1);
        ln_joint.push(ln_h + prior.ln_predictive(x));
        for (r, s) in stats.iter().enumerate() {
            ln_joint.push(ln_1mh + s.ln_predictive(x) + ln_p[r]);
        }
        let z = log_sum_exp(&ln_joint);
        ln_p = ln_joint.iter().map(|v| v - z).collect();
        let mut next = Vec::with_capacity(stats.len() + 1);
        next.push(prior.update(x));
        next.extend(stats.iter().map(|s| s.update(x)));
        stats = next;
        let row: Vec<f64> = ln_p.iter().map(|v| v.exp()).collect();
        let total: f64 = row.iter().sum();
        posterior.push(row.iter().map(|v| v / total).collect());
    }

    let realtime_probability: Vec<f64> = posterior.iter().map(|row| row[0]).collect();
    let changepoint_probability: Vec<f64> = (0..posterior.len())
        .map(|t| {
            let d = cfg.lag.min(posterior.len() - 1 - t);
            posterior[t + d][d]
        })
        .collect();
    let candidates: Vec<Detection> = changepoint_probability
        .iter()
        .enumerate()
        .skip(cfg.burn_in)
        .filter(|(_, &p)| p >= cfg.threshold)
        .map(|(index, &probability)| Detection { index, probability })
        .collect();
    Ok(ChangepointReport {
        detections: suppress(&candidates, cfg.suppression),
        run_length_posterior: posterior,
        realtime_probability,
        changepoint_probability,
    })
}
