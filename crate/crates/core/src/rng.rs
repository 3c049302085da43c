//! Counter-based seeding for reproducible parallel sampling.
//!
//! Every (round, particle) pair gets its own ChaCha stream derived from the
//! run seed, so the random numbers a particle consumes do not depend on which
//! worker thread happens to run it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream reserved for the resampling step of each round.
const RESAMPLE_STREAM: u64 = u64::MAX;

// SplitMix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one round; distinct rounds give unrelated key material.
pub fn round_seed(seed: u64, round: u64) -> u64 {
    mix(mix(seed) ^ round.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

pub fn particle_rng(seed: u64, round: u64, particle: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(round_seed(seed, round));
    rng.set_stream(particle as u64);
    rng
}

pub fn resample_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(round_seed(seed, round));
    rng.set_stream(RESAMPLE_STREAM);
    rng
}

/// Independent child seed, e.g. for the i-th replicate of an experiment.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    mix(seed ^ mix(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}
