//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! addressed by `(seed, stream)`, so independent work items never share state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for stream `stream` of `seed`. Stream 0 is what a plain single run uses.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Counter-mode split of an experiment seed into an independent child seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer over base + golden-ratio counter
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
