//! Seed derivation for deterministic, parallelism-independent RNG streams.
//!
//! Every randomized routine draws from a ChaCha stream keyed by
//! (master seed, domain, index), so results never depend on evaluation
//! order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; decorrelates nearby (domain, index) pairs.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derives an independent sub-seed from a master seed.
pub fn derive_seed(master: u64, domain: u64, index: u64) -> u64 {
    let a = splitmix64(master ^ 0xA076_1D64_78BD_642F);
    let b = splitmix64(a ^ domain);
    splitmix64(b ^ index)
}

/// A fresh RNG stream for (master, domain, index).
pub fn stream(master: u64, domain: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, domain, index))
}
