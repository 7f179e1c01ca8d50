use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::seed::derive_indexed;

pub const MAX_ITERATIONS: usize = 300;
pub const REL_TOLERANCE: f64 = 1e-6;
/// Independent careful-seeding restarts per k.
pub const N_INIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeansFit {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after every assignment step.
    pub inertia_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterResult {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub elbow_curve: Vec<(usize, f64)>,
    pub inertia_history: Vec<f64>,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centre) in centroids.iter().enumerate() {
        let d = dist2(row, centre);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Samples a row with probability proportional to its squared distance
/// to the nearest existing centre; falls back to the first unused row when
/// every distance is zero.
fn d2_sample<R: Rng>(data: &[Vec<f64>], centroids: &[Vec<f64>], chosen: &[usize], rng: &mut R) -> usize {
    let d: Vec<f64> = data.iter().map(|r| nearest(r, centroids).1).collect();
    let total: f64 = d.iter().sum();
    if total > 0.0 {
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        for (i, x) in d.iter().enumerate() {
            acc += x;
            if u < acc && *x > 0.0 {
                return i;
            }
        }
        return d.iter().rposition(|&x| x > 0.0).expect("positive total");
    }
    (0..data.len()).find(|i| !chosen.contains(i)).unwrap_or(0)
}

fn careful_seeding<R: Rng>(data: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let first = rng.random_range(0..data.len());
    let mut chosen = vec![first];
    let mut centroids = vec![data[first].clone()];
    while centroids.len() < k {
        let i = d2_sample(data, &centroids, &chosen, rng);
        chosen.push(i);
        centroids.push(data[i].clone());
    }
    centroids
}

/// Lloyd iterations from the given centres until the relative inertia
/// change drops below [`REL_TOLERANCE`] or [`MAX_ITERATIONS`] is reached.
/// A cluster that loses all its rows keeps its previous centre.
pub fn lloyd(data: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> KMeansFit {
    let k = centroids.len();
    let dim = data[0].len();
    let mut assignments = vec![0; data.len()];
    let mut history: Vec<f64> = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let mut inertia = 0.0;
        for (i, row) in data.iter().enumerate() {
            let (c, d) = nearest(row, &centroids);
            assignments[i] = c;
            inertia += d;
        }
        let converged = history
            .last()
            .is_some_and(|&prev| prev - inertia <= REL_TOLERANCE * prev.max(f64::MIN_POSITIVE));
        history.push(inertia);
        if converged || inertia == 0.0 {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (row, &c) in data.iter().zip(&assignments) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(row) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    KMeansFit {
        k,
        assignments,
        centroids,
        inertia: *history.last().expect("at least one pass"),
        inertia_history: history,
    }
}

/// Best of [`N_INIT`] careful-seeding runs, plus an optional warm start.
pub fn kmeans(data: &[Vec<f64>], k: usize, seed: u64, warm: Option<Vec<Vec<f64>>>) -> Result<KMeansFit> {
    if data.is_empty() {
        return Err(Error::Precondition("k-means needs at least one row".into()));
    }
    if k == 0 || k > data.len() {
        return Err(Error::param(format!("k = {k} outside [1, {}]", data.len())));
    }
    let mut best: Option<KMeansFit> = None;
    let mut consider = |fit: KMeansFit| {
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    };
    for run in 0..N_INIT {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_indexed(seed, "kmeans", (k * N_INIT + run) as u64));
        consider(lloyd(data, careful_seeding(data, k, &mut rng)));
    }
    if let Some(mut centres) = warm {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_indexed(seed, "kmeans-warm", k as u64));
        let mut chosen = Vec::new();
        while centres.len() < k {
            let i = d2_sample(data, &centres, &chosen, &mut rng);
            chosen.push(i);
            centres.push(data[i].clone());
        }
        consider(lloyd(data, centres));
    }
    Ok(best.expect("N_INIT >= 1"))
}

/// Elbow = interior k with the largest second difference of inertia
/// (smallest k on ties). With fewer than three k values the largest k
/// is returned.
pub fn elbow(curve: &[(usize, f64)]) -> usize {
    if curve.len() < 3 {
        return curve.last().map_or(1, |c| c.0);
    }
    let mut best = (curve[1].0, f64::NEG_INFINITY);
    for w in curve.windows(3) {
        let d2 = w[0].1 - 2.0 * w[1].1 + w[2].1;
        if d2 > best.1 {
            best = (w[1].0, d2);
        }
    }
    best.0
}

/// Clusters for every k in `k_min..=k_max` and keeps the elbow. Each k also
/// starts from the previous k's centres plus one D²-sampled centre, so the
/// curve never increases.
pub fn kmeans_elbow(m: &FeatureMatrix, k_min: usize, k_max: usize, seed: u64) -> Result<ClusterResult> {
    if k_min < 1 || k_min > k_max {
        return Err(Error::param(format!("invalid k range [{k_min}, {k_max}]")));
    }
    if k_max > m.n_rows() {
        return Err(Error::param(format!("k = {k_max} exceeds {} rows", m.n_rows())));
    }
    let mut fits: Vec<KMeansFit> = Vec::new();
    for k in k_min..=k_max {
        let warm = fits.last().map(|f| f.centroids.clone());
        fits.push(kmeans(&m.values, k, seed, warm)?);
    }
    let curve: Vec<(usize, f64)> = fits.iter().map(|f| (f.k, f.inertia)).collect();
    let k = elbow(&curve);
    let chosen = fits.into_iter().find(|f| f.k == k).expect("k in range");
    Ok(ClusterResult {
        k,
        assignments: chosen.assignments,
        centroids: chosen.centroids,
        inertia: chosen.inertia,
        elbow_curve: curve,
        inertia_history: chosen.inertia_history,
    })
}
