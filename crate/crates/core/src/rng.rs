//! Seed derivation for independent, reproducible random streams.
//!
//! Every random quantity in a run is drawn from its own generator whose seed
//! is a hash of the master seed and a path of stream labels (day, window,
//! region, ...). Two policies asking for the same path see the same numbers,
//! which gives paired comparisons common random numbers for free.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_FLEET: u64 = 1;
pub const STREAM_SCENARIOS: u64 = 2;
pub const STREAM_CHARGE_WAIT: u64 = 3;
pub const STREAM_SYNTH: u64 = 4;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, p| splitmix64(acc ^ splitmix64(*p)))
}

pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
