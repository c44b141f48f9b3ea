//! Deterministic stream-split randomness.
//!
//! Every random decision the engine makes is addressed by an explicit
//! coordinate tuple (seed, round, phase, vertex, color, ...). The draw is the
//! SplitMix64 finalizer applied to the folded coordinates, so the outcome of
//! a decision is independent of iteration order and identical across
//! platforms. Streams that need many draws (completion, estimator trials) get
//! a ChaCha8 generator keyed by the same scheme.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const PHASE_ASSIGN: u64 = 1;
pub const PHASE_EQUALIZE: u64 = 2;
pub const PHASE_COMPLETE: u64 = 3;
pub const PHASE_TRIAL: u64 = 4;
pub const PHASE_RUN: u64 = 5;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a coordinate tuple into one well-mixed 64-bit word.
pub fn stream_u64(seed: u64, coords: &[u64]) -> u64 {
    let mut h = mix(seed ^ GOLDEN);
    for (i, &c) in coords.iter().enumerate() {
        h = mix(h ^ c.wrapping_add(GOLDEN.wrapping_mul(i as u64 + 1)));
    }
    h
}

/// Uniform draw in [0, 1) with 53 bits of precision.
pub fn stream_unit(seed: u64, coords: &[u64]) -> f64 {
    (stream_u64(seed, coords) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Multi-draw generator for a coordinate-addressed stream.
pub fn stream_rng(seed: u64, coords: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_u64(seed, coords))
}
