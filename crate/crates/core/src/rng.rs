//! Seeded random streams.
//!
//! Every stochastic component draws from ChaCha8 (a counter-based stream
//! cipher generator). A `(seed, stream)` pair selects an independent stream,
//! so results do not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed for a nested component (e.g. realisation -> variable).
pub fn child_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser over the combined value
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
