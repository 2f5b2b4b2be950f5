//! Seedable randomness. Every stochastic operation takes its source explicitly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The concrete generator used throughout the crate.
pub type RandomSource = ChaCha8Rng;

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn derive_rng(seed: u64, stream: u64) -> RandomSource {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
