//! Seeded random number generation.
//!
//! Every stochastic operation in the crate draws from a ChaCha8 stream
//! seeded by a caller-supplied 64-bit value, so equal seeds yield
//! identical results on every platform. Independent sub-streams (one per
//! bootstrap replicate, one per ensemble member, ...) are derived by
//! mixing the base seed with a stream tag.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Construct the generator for `seed`.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent sub-seed for stream `stream` of `seed`.
///
/// Uses splitmix64 finalization on both inputs, which is enough to
/// decorrelate consecutive tags.
pub fn derive(seed: u64, stream: u64) -> u64 {
    splitmix64(seed.wrapping_add(splitmix64(stream)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fisher-Yates shuffle of `0..n` under `seed`.
pub fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeded(seed));
    idx
}
