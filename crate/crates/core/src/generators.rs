//! Seeded stimulus generators. Every function is a pure function of its
//! parameters and [`Seed`].

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseKind {
    /// `exp(-t / tau)` for `t >= 0`, tau in samples.
    ExponentialDecay { tau: f64 },
    /// `exp(-(t - 4w)^2 / 2w^2)` on `[0, 8w]`, width in samples.
    GaussianBump { width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    pub kind: PulseKind,
    pub amplitude: f64,
}

impl PulseShape {
    pub fn exponential(tau: f64, amplitude: f64) -> Result<Self> {
        Self::new(PulseKind::ExponentialDecay { tau }, amplitude)
    }

    pub fn gaussian_bump(width: f64, amplitude: f64) -> Result<Self> {
        Self::new(PulseKind::GaussianBump { width }, amplitude)
    }

    pub fn new(kind: PulseKind, amplitude: f64) -> Result<Self> {
        let (name, v) = match kind {
            PulseKind::ExponentialDecay { tau } => ("tau", tau),
            PulseKind::GaussianBump { width } => ("width", width),
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::param(name, format!("must be positive, got {v}")));
        }
        if !amplitude.is_finite() {
            return Err(Error::param("amplitude", "must be finite"));
        }
        Ok(PulseShape { kind, amplitude })
    }

    /// Support length in samples beyond which the pulse is below 1e-12 of
    /// its peak.
    fn support(&self) -> f64 {
        match self.kind {
            PulseKind::ExponentialDecay { tau } => tau * 12.0 * std::f64::consts::LN_10,
            PulseKind::GaussianBump { width } => 8.0 * width,
        }
    }

    fn value_at(&self, t: f64) -> f64 {
        match self.kind {
            PulseKind::ExponentialDecay { tau } => self.amplitude * (-t / tau).exp(),
            PulseKind::GaussianBump { width } => {
                let d = (t - 4.0 * width) / width;
                self.amplitude * (-0.5 * d * d).exp()
            }
        }
    }
}

impl Default for PulseShape {
    /// Exponential decay, tau = 8 samples, unit amplitude.
    fn default() -> Self {
        PulseShape {
            kind: PulseKind::ExponentialDecay { tau: 8.0 },
            amplitude: 1.0,
        }
    }
}

fn check_len(n: usize) -> Result<()> {
    if n < Signal::MIN_LEN {
        Err(Error::SignalTooShort {
            min: Signal::MIN_LEN,
            len: n,
        })
    } else {
        Ok(())
    }
}

fn check_freq(freq_norm: f64) -> Result<()> {
    if freq_norm > 0.0 && freq_norm < 0.5 {
        Ok(())
    } else {
        Err(Error::param(
            "freq_norm",
            format!("must lie in (0, 0.5), got {freq_norm}"),
        ))
    }
}

pub fn gaussian_noise(n: usize, mean: f64, sigma: f64, seed: Seed) -> Result<Signal> {
    check_len(n)?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
    }
    if !mean.is_finite() {
        return Err(Error::param("mean", "must be finite"));
    }
    let mut rng = seed.rng();
    let samples = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            mean + sigma * z
        })
        .collect();
    Signal::normalized(samples)
}

/// Tone amplitude giving `snr_db` against unit-variance noise:
/// `(A^2 / 2) / 1 = 10^(snr/10)`.
pub fn tone_amplitude_for_snr(snr_db: f64) -> f64 {
    (2.0 * 10f64.powf(snr_db / 10.0)).sqrt()
}

/// `A sin(2 pi f k + phi0) + w[k]`, `w ~ N(0, 1)`; `phi0` is the first draw
/// of the seeded stream.
pub fn noisy_sinusoid(n: usize, freq_norm: f64, snr_db: f64, seed: Seed) -> Result<Signal> {
    check_len(n)?;
    check_freq(freq_norm)?;
    if !snr_db.is_finite() {
        return Err(Error::param("snr_db", "must be finite"));
    }
    let amplitude = tone_amplitude_for_snr(snr_db);
    let mut rng = seed.rng();
    let phase0 = rng.random::<f64>() * 2.0 * PI;
    let samples = (0..n)
        .map(|k| {
            let w: f64 = StandardNormal.sample(&mut rng);
            amplitude * (2.0 * PI * freq_norm * k as f64 + phase0).sin() + w
        })
        .collect();
    Signal::normalized(samples)
}

/// Shot noise together with the pulse onset times that fall in `[0, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotNoise {
    pub signal: Signal,
    pub onsets: Vec<f64>,
}

/// Superposition of `shape` pulses at the arrival times of a Poisson
/// process with `rate` events per sample. Onset times are continuous; the
/// process starts one pulse support before sample 0 so the output is
/// stationary from the first sample.
pub fn filtered_poisson(n: usize, rate: f64, shape: &PulseShape, seed: Seed) -> Result<Signal> {
    Ok(filtered_poisson_with_onsets(n, rate, shape, seed)?.signal)
}

pub fn filtered_poisson_with_onsets(n: usize, rate: f64, shape: &PulseShape, seed: Seed) -> Result<ShotNoise> {
    check_len(n)?;
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::param("rate", format!("must be positive, got {rate}")));
    }
    let support = shape.support();
    let start = -support.ceil();
    let end = n as f64;
    let gaps = Exp::new(rate).map_err(|e| Error::param("rate", e.to_string()))?;
    let mut rng = seed.rng();
    let mut events = Vec::new();
    let mut t = start + gaps.sample(&mut rng);
    while t < end {
        events.push(t);
        t += gaps.sample(&mut rng);
    }

    let samples = match shape.kind {
        PulseKind::ExponentialDecay { tau } => exponential_shot(&events, n, tau, shape.amplitude),
        PulseKind::GaussianBump { .. } => {
            let mut out = vec![0.0; n];
            for &onset in &events {
                let first = onset.ceil().max(0.0) as usize;
                let last = ((onset + support).floor().min(end - 1.0)).max(-1.0);
                if last < first as f64 {
                    continue;
                }
                for (k, slot) in out.iter_mut().enumerate().take(last as usize + 1).skip(first) {
                    *slot += shape.value_at(k as f64 - onset);
                }
            }
            out
        }
    };
    let onsets = events.into_iter().filter(|&t| t >= 0.0).collect();
    Ok(ShotNoise {
        signal: Signal::normalized(samples)?,
        onsets,
    })
}

// First-order recursion: y[k] = y[k-1] e^{-1/tau} + sum of pulses with onset
// in (k-1, k], each contributing A e^{-(k - t)/tau}.
fn exponential_shot(events: &[f64], n: usize, tau: f64, amplitude: f64) -> Vec<f64> {
    let decay = (-1.0 / tau).exp();
    let mut out = Vec::with_capacity(n);
    let mut idx = 0;
    let mut y = 0.0;
    let first_k = events.first().map_or(0, |t| t.ceil() as i64).min(0);
    for k in first_k..n as i64 {
        y *= decay;
        let kf = k as f64;
        while idx < events.len() && events[idx] <= kf {
            y += amplitude * (-(kf - events[idx]) / tau).exp();
            idx += 1;
        }
        if k >= 0 {
            out.push(y);
        }
    }
    out
}

/// `a_sin sin(2 pi f k) + a_cos cos(2 pi f k)`.
pub fn two_tone(n: usize, freq_norm: f64, a_sin: f64, a_cos: f64) -> Result<Signal> {
    check_len(n)?;
    check_freq(freq_norm)?;
    let samples = (0..n)
        .map(|k| {
            let phase = 2.0 * PI * freq_norm * k as f64;
            a_sin * phase.sin() + a_cos * phase.cos()
        })
        .collect();
    Signal::normalized(samples)
}
