//! Fixtures shared by the criterion benches.

use envcv_core::{gaussian_noise, Seed, Signal};

/// Epoch lengths benchmarked: powers of two plus the 8000-sample epoch used
/// for the reference calibration tables.
pub const EPOCH_LENGTHS: [usize; 4] = [1024, 4096, 8000, 16384];

pub fn noise_epoch(n: usize) -> Signal {
    gaussian_noise(n, 0.0, 1.0, Seed(0xbe4c)).expect("n >= 2")
}
