//! Seeding and stream splitting.
//!
//! Every random draw in a chain comes from a ChaCha8 generator seeded from a
//! 64-bit chain seed. Separate purposes use separate ChaCha streams of the
//! same key, so e.g. adaptation decisions never perturb the HMC draws.
//!
//! Per-chain seeds derive from the master seed as
//! `splitmix64(master + (chain + 1) * 0x9E3779B97F4A7C15)`, so chain `c`'s
//! seed depends only on `(master, c)` and adding chains leaves earlier ones alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

/// Momentum, trajectory length and Metropolis draws.
pub const STREAM_HMC: u64 = 0;
/// Adaptation coin flips (`u < p_i`).
pub const STREAM_ADAPT: u64 = 1;
/// Initial-position jitter drawn by the experiment driver.
pub const STREAM_INIT: u64 = 2;

pub fn stream(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn chain_seed(master: u64, chain: usize) -> u64 {
    splitmix64(master.wrapping_add((chain as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}
