//! Deterministic seeding.
//!
//! Every random stream in the crate is a ChaCha8 generator keyed by a
//! [`Seed`]. Per-trial streams come from [`Seed::derive`], which mixes the
//! parent seed with the trial index through SplitMix64, so a trial's draws
//! depend only on `(seed, index)` and never on which worker ran it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator family recorded in calibration metadata.
pub const RNG_NAME: &str = "chacha8-splitmix64";
/// Normal sampler recorded in calibration metadata (`rand_distr::StandardNormal`).
pub const GAUSSIAN_SAMPLER: &str = "ziggurat";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

impl Seed {
    pub const fn new(value: u64) -> Self {
        Seed(value)
    }

    pub const fn value(self) -> u64 {
        self.0
    }

    /// Child seed for stream `index`.
    pub fn derive(self, index: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(index)))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

#[inline]
pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
