//! Seeded random streams.
//!
//! Every random draw comes from a ChaCha stream keyed by the user seed, a
//! component name and an index (trial, replicate, ...). Work split across
//! threads therefore yields the same numbers regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Scenario,
    Sampling,
    Bootstrap,
    Synthetic,
}

impl Stream {
    fn key(self) -> u64 {
        match self {
            Stream::Scenario => 0x5ce7_a410,
            Stream::Sampling => 0x5a3b_1e00,
            Stream::Bootstrap => 0xb007_57a9,
            Stream::Synthetic => 0x5e7d_a7a0,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream.key().rotate_left(32));
    rng.set_stream(index);
    rng
}
