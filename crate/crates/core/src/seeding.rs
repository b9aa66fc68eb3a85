//! Deterministic seed derivation for parallel tasks.
//!
//! Every randomized task (one simulation, one bootstrap replication, one fit)
//! gets its own RNG seeded from the base seed and the task's indices, so
//! results are independent of scheduling and thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; decorrelates structured index patterns.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derive a task seed from a base seed and up to three indices.
pub fn derive_seed(base: u64, indices: &[u64]) -> u64 {
    let mut acc = mix(base);
    for (level, &ix) in indices.iter().enumerate() {
        acc = mix(acc ^ mix(ix.wrapping_add(0x1000 * (level as u64 + 1))));
    }
    acc
}

/// RNG for one task. ChaCha8 keeps the stream identical across platforms.
pub fn task_rng(base: u64, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, indices))
}
