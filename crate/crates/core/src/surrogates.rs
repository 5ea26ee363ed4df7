//! Fourier-transform phase randomization (FTPR).
//!
//! Each surrogate keeps every DFT magnitude of the original and draws a new
//! uniform phase for each strictly positive frequency; negative frequencies
//! get the conjugate phase so the result is real. DC and (for even lengths)
//! Nyquist bins are left untouched, which keeps the mean and the sign of the
//! Nyquist component.

use std::f64::consts::PI;

use rand::Rng;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::parallel;
use crate::rng::Seed;
use crate::signal::{self, Signal};

pub const MIN_LEN: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateBatch {
    pub original: Signal,
    pub surrogates: Vec<Signal>,
    pub seed: Seed,
}

/// `count` FTPR surrogates of `signal`; surrogate `i` draws its phases from
/// `seed.derive(i)`.
pub fn ftpr(signal: &Signal, count: usize, seed: Seed) -> Result<SurrogateBatch> {
    if signal.len() < MIN_LEN {
        return Err(Error::SignalTooShort {
            min: MIN_LEN,
            len: signal.len(),
        });
    }
    let spectrum = signal::real_spectrum(signal.samples());
    let surrogates = parallel::try_map_trials(count, |i| {
        let (samples, _) = randomize_phases(&spectrum, seed.derive(i));
        Signal::new(samples, signal.sample_rate_hz())
    })?;
    Ok(SurrogateBatch {
        original: signal.clone(),
        surrogates,
        seed,
    })
}

/// One surrogate from a precomputed spectrum. Also returns the largest
/// imaginary residue dropped by the inverse transform.
pub(crate) fn randomize_phases(spectrum: &[Complex64], seed: Seed) -> (Vec<f64>, f64) {
    let n = spectrum.len();
    let mut rng = seed.rng();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    out[0] = Complex64::new(spectrum[0].re, 0.0);
    let last_positive = (n - 1) / 2;
    for k in 1..=last_positive {
        let phase = rng.random::<f64>() * 2.0 * PI;
        let z = Complex64::from_polar(spectrum[k].norm(), phase);
        out[k] = z;
        out[n - k] = z.conj();
    }
    if n % 2 == 0 {
        out[n / 2] = Complex64::new(spectrum[n / 2].re, 0.0);
    }
    signal::real_inverse(out)
}

/// `max_k |P_a(k) - P_b(k)| / max_k P_a(k)` over DFT power spectra.
pub fn max_spectral_deviation(a: &[f64], b: &[f64]) -> f64 {
    let pa: Vec<f64> = signal::real_spectrum(a).iter().map(|z| z.norm_sqr()).collect();
    let pb: Vec<f64> = signal::real_spectrum(b).iter().map(|z| z.norm_sqr()).collect();
    let peak = pa.iter().cloned().fold(0.0, f64::max);
    let worst = pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if peak > 0.0 {
        worst / peak
    } else {
        worst
    }
}
