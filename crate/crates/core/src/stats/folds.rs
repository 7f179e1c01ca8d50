use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{Region, Song};
use crate::error::{Error, Result};

/// A (decade, region) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FoldStratum {
    pub decade: i32,
    pub region: Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StratumMerge {
    pub from: FoldStratum,
    pub into: FoldStratum,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldAssignment {
    pub k: usize,
    /// Fold of each input song, in input order.
    pub folds: Vec<usize>,
    pub merges: Vec<StratumMerge>,
    /// Final strata with their sizes.
    pub strata: Vec<(FoldStratum, usize)>,
}

impl FoldAssignment {
    pub fn fold_members(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] == fold).collect()
    }
}

/// Where an undersized stratum goes: the nearest other decade of the same
/// region (the earlier one on ties), else the International cell of the
/// same decade, else the largest remaining stratum (earliest on ties).
fn merge_target(s: FoldStratum, cells: &BTreeMap<FoldStratum, Vec<usize>>) -> FoldStratum {
    let same_region = cells
        .keys()
        .filter(|o| o.region == s.region && o.decade != s.decade)
        .min_by_key(|o| ((o.decade - s.decade).abs(), o.decade));
    if let Some(o) = same_region {
        return *o;
    }
    let intl = FoldStratum {
        decade: s.decade,
        region: Region::International,
    };
    if s.region != Region::International && cells.contains_key(&intl) {
        return intl;
    }
    *cells
        .iter()
        .filter(|(o, _)| **o != s)
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(a.0)))
        .expect("at least two strata")
        .0
}

/// Temporally stratified k-fold assignment. Strata smaller than `k` are
/// merged (smallest first) until every stratum holds at least `k` songs or a
/// single stratum remains. Each stratum is shuffled with the seeded RNG and
/// dealt round-robin, the fold counter running on across strata.
pub fn temporal_folds(songs: &[Song], k: usize, seed: u64) -> Result<FoldAssignment> {
    let keys: Vec<FoldStratum> = songs
        .iter()
        .map(|s| FoldStratum {
            decade: s.decade(),
            region: s.region,
        })
        .collect();
    temporal_folds_by_key(&keys, k, seed)
}

/// [`temporal_folds`] over precomputed stratum keys, one per item.
pub fn temporal_folds_by_key(keys: &[FoldStratum], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::param("k must be at least 2"));
    }
    if keys.len() < k {
        return Err(Error::param(format!("{} songs cannot fill {k} folds", keys.len())));
    }
    let mut cells: BTreeMap<FoldStratum, Vec<usize>> = BTreeMap::new();
    for (i, key) in keys.iter().enumerate() {
        cells.entry(*key).or_default().push(i);
    }
    let mut merges = Vec::new();
    while cells.len() > 1 {
        let Some((&small, _)) = cells
            .iter()
            .filter(|(_, m)| m.len() < k)
            .min_by(|a, b| a.1.len().cmp(&b.1.len()).then(a.0.cmp(b.0)))
        else {
            break;
        };
        let into = merge_target(small, &cells);
        let moved = cells.remove(&small).expect("present");
        merges.push(StratumMerge {
            from: small,
            into,
            size: moved.len(),
        });
        cells.get_mut(&into).expect("present").extend(moved);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; keys.len()];
    let mut counter = 0;
    for members in cells.values_mut() {
        members.sort_unstable();
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[i] = counter % k;
            counter += 1;
        }
    }
    Ok(FoldAssignment {
        k,
        folds,
        merges,
        strata: cells.iter().map(|(s, m)| (*s, m.len())).collect(),
    })
}
