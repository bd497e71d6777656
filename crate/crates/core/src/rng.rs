//! Seeded randomness. Every run or trial owns one generator built from an
//! explicit seed; nothing reads global state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed for sub-stream `stream` of `seed`.
///
/// Stream 0 maps to `seed` itself so that a single trial reproduces the
/// standalone run with the same seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    if stream == 0 {
        return seed;
    }
    // splitmix64 finalizer over the combined word
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
