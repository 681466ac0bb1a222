//! Seeded random streams.
//!
//! Every stochastic stage draws from a ChaCha8 generator keyed by the
//! scenario seed and a fixed stage identifier, so the output of one stage
//! never depends on how many numbers another stage consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stage identifiers. Values are part of the reproducibility contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub(crate) enum Stage {
    PairEmission = 1,
    DetectorFate = 2,
    DarkCounts = 3,
    Survival = 4,
    Jammer = 5,
    Background = 6,
}

/// SplitMix64 finalizer.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn stage_rng(seed: u64, stage: Stage) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stage as u64);
    rng
}

/// Generator for one photon, keyed by its timestamp and its rank among
/// photons sharing that timestamp.
pub(crate) struct KeyedRng {
    base: ChaCha8Rng,
}

impl KeyedRng {
    pub(crate) fn new(seed: u64, stage: Stage) -> Self {
        let base = ChaCha8Rng::seed_from_u64(mix64(seed ^ mix64(stage as u64)));
        KeyedRng { base }
    }

    pub(crate) fn for_key(&self, tag: u64, dup: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(mix64(tag) ^ dup.rotate_left(47));
        rng.set_word_pos(0);
        rng
    }
}
