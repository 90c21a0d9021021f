//! Seeded random streams keyed by (seed, level, attempt, set index).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Key derived from a seed and an ordered list of labels.
pub fn derive_key(seed: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(mix64(seed), |k, &l| mix64(k ^ mix64(l)))
}

/// Generator for one independent stream. Streams with distinct `(key, stream)`
/// pairs do not overlap.
pub fn stream(key: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(stream);
    rng
}
