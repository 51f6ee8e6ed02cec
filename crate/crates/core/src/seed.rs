//! Deterministic seed derivation.
//!
//! Every random stream is a ChaCha8 generator seeded with
//! `splitmix64(parent ^ (salt * 0x9E3779B97F4A7C15))`, where `splitmix64` is
//! the standard finalizer of Steele, Lea and Flood. Trial `t` of an
//! experiment uses `derive(master_seed, t)`; inside a run the four streams
//! use fixed salts (see [`RunStreams`]).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(parent: u64, salt: u64) -> u64 {
    splitmix64(parent ^ salt.wrapping_mul(GOLDEN_GAMMA))
}

pub fn rng_from(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent random streams of one protocol run.
///
/// * `ordering` is Alice's private randomness (transmission order, secret copy).
/// * `public` drives announced choices (observables, check selection).
/// * `quantum` samples measurement outcomes.
/// * `adversary` is used by the coalition.
pub struct RunStreams {
    pub ordering: SimRng,
    pub public: SimRng,
    pub quantum: SimRng,
    pub adversary: SimRng,
}

impl RunStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            ordering: rng_from(derive(seed, 1)),
            public: rng_from(derive(seed, 2)),
            quantum: rng_from(derive(seed, 3)),
            adversary: rng_from(derive(seed, 4)),
        }
    }
}
