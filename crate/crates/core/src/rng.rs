//! Seed handling.
//!
//! Every random choice in the crate flows from a `u64` seed through
//! [`stream`], so that work item `i` of a batch sees the same generator no matter
//! which thread runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for work item `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    seeded(derive(seed, index))
}

/// Mixes `index` into `seed` (splitmix64 finalizer on both halves).
pub fn derive(seed: u64, index: u64) -> u64 {
    mix(seed ^ mix(index.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
