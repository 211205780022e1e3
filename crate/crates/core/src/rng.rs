//! Seeded randomness.
//!
//! All sampling uses ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded through
//! `seed_from_u64`. Sub-streams, one per tomography setting or statistics
//! trial, get their seed from [`derive_seed`]: the SplitMix64 finalizer
//! applied to `base + index` (wrapping).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed reserved for documentation examples and the default CLI runs.
pub const DOC_SEED: u64 = 0;

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sub-stream `index` of a run seeded with `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base.wrapping_add(index))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
