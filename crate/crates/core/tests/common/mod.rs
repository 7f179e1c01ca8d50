#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution, Normal, StandardNormal};

pub const SYNTH_TOPICS: usize = 3;
pub const SYNTH_WORDS_PER_TOPIC: usize = 10;

/// Documents drawn from three disjoint-vocabulary topics. Returns the
/// documents, the vocabulary and the true topic-word rows over it.
pub fn synthetic_lda_corpus(n_docs: usize, seed: u64) -> (Vec<Vec<String>>, Vec<String>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = SYNTH_TOPICS * SYNTH_WORDS_PER_TOPIC;
    let vocab: Vec<String> = (0..v)
        .map(|i| format!("t{}w{}", i / SYNTH_WORDS_PER_TOPIC, i % SYNTH_WORDS_PER_TOPIC))
        .collect();
    let harmonic: f64 = (1..=SYNTH_WORDS_PER_TOPIC).map(|r| 1.0 / r as f64).sum();
    let truth: Vec<Vec<f64>> = (0..SYNTH_TOPICS)
        .map(|t| {
            (0..v)
                .map(|w| {
                    if w / SYNTH_WORDS_PER_TOPIC == t {
                        1.0 / ((w % SYNTH_WORDS_PER_TOPIC) + 1) as f64 / harmonic
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let dir = Dirichlet::new([0.1; SYNTH_TOPICS]).unwrap();
    let docs = (0..n_docs)
        .map(|_| {
            let theta = dir.sample(&mut rng);
            let len = rng.random_range(40..=60);
            (0..len)
                .map(|_| {
                    let t = pick(&theta, &mut rng);
                    vocab[pick(&truth[t], &mut rng)].clone()
                })
                .collect()
        })
        .collect();
    (docs, vocab, truth)
}

fn pick<R: Rng>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * p.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, x) in p.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Average cosine after greedily pairing learned rows with true rows,
/// best pair first. Learned rows are re-indexed onto `vocab` by word.
pub fn greedy_topic_match(
    learned: &[Vec<f64>],
    learned_vocab: &[String],
    truth: &[Vec<f64>],
    vocab: &[String],
) -> f64 {
    let remapped: Vec<Vec<f64>> = learned
        .iter()
        .map(|row| {
            vocab
                .iter()
                .map(|w| learned_vocab.iter().position(|x| x == w).map_or(0.0, |i| row[i]))
                .collect()
        })
        .collect();
    let mut sims = Vec::new();
    for (i, l) in remapped.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            sims.push((cosine(l, t), i, j));
        }
    }
    sims.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut used_l, mut used_t) = (vec![false; remapped.len()], vec![false; truth.len()]);
    let mut total = 0.0;
    let mut matched = 0;
    for (s, i, j) in sims {
        if !used_l[i] && !used_t[j] {
            used_l[i] = true;
            used_t[j] = true;
            total += s;
            matched += 1;
        }
    }
    total / matched as f64
}

/// `n` points per centre with isotropic Gaussian noise.
pub fn blobs(centres: &[Vec<f64>], n: usize, sigma: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..n {
            rows.push(centre.iter().map(|x| x + noise.sample(&mut rng)).collect());
            labels.push(c);
        }
    }
    (rows, labels)
}

pub fn gaussian_series(n: usize, mean: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| mean + rng.sample::<f64, _>(StandardNormal)).collect()
}
