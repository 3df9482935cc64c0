//! Seeded random streams.
//!
//! Every stochastic computation draws from ChaCha8 seeded with the master
//! seed; replicate `k` of a batch uses stream `k` of that generator, so
//! batches are reproducible regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier recorded in trajectory and manifest metadata.
pub const ALGORITHM: &str = "chacha8/seed_from_u64+stream";

pub type StreamRng = ChaCha8Rng;

pub fn stream(master: u64, k: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(k);
    rng
}
