//! Seeded random sub-streams.
//!
//! Every consumer of randomness draws from its own ChaCha stream derived
//! from the scenario seed and a stream name, so adding a new consumer never
//! shifts the draws seen by existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SENSOR_STREAM: &str = "sensor";
pub const HOOK_STREAM: &str = "hook";

/// Deterministic generator for `(seed, name)`.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(name.as_bytes()));
    rng
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}
