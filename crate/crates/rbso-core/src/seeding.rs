//! Seed-stream derivation so that target placement, robot placement and the search
//! loop each get an independent deterministic stream from one run seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Targets,
    Robots,
    Search,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Targets => 1,
            Stream::Robots => 2,
            Stream::Search => 3,
        }
    }
}

/// Deterministic sub-stream of `seed` for one purpose.
pub fn substream(seed: u64, stream: Stream) -> ChaCha8Rng {
    // splitmix64 finalizer over (seed, tag) keeps the streams well separated.
    let mut z = seed ^ stream.tag().wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}
