//! Deterministic derivation of per-module seeds from one global seed.

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a seed for the stage called `label`. Stable across platforms and
/// compiler versions (no `std::hash` involved).
pub fn derive(global: u64, label: &str) -> u64 {
    label
        .bytes()
        .fold(mix(global), |acc, b| mix(acc ^ u64::from(b)))
}

/// Derives a seed for an indexed sub-task (a `k` value, a fold, ...).
pub fn derive_indexed(global: u64, label: &str, index: u64) -> u64 {
    mix(derive(global, label) ^ mix(index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_separate_streams() {
        assert_ne!(derive(7, "lda"), derive(7, "kmeans"));
        assert_eq!(derive(7, "lda"), derive(7, "lda"));
        assert_ne!(derive_indexed(7, "k", 2), derive_indexed(7, "k", 3));
    }
}
