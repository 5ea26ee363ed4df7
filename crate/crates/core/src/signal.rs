//! DSP kernel: FFT, analytic signal, Hilbert envelope and brick-wall
//! zero-phase band limiting.
//!
//! All transforms treat the epoch as one period of a circular sequence. No
//! taper or padding is applied; the calibration tables are built through the
//! same code path, so whatever bias the wrap-around introduces is part of the
//! null distribution as well.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Name of the discrete Hilbert construction, recorded in calibration metadata.
pub const HILBERT_METHOD: &str = "fft-one-sided";

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

fn transform_in_place(buf: &mut [Complex64], direction: FftDirection) {
    if buf.len() > 1 {
        plan(buf.len(), direction).process(buf);
    }
}

/// Unnormalized forward DFT, `X[k] = sum_j x[j] exp(-2 pi i jk/n)`.
pub fn fft_forward(samples: &[Complex64]) -> Result<Vec<Complex64>> {
    if samples.is_empty() {
        return Err(Error::EmptySignal);
    }
    let mut buf = samples.to_vec();
    transform_in_place(&mut buf, FftDirection::Forward);
    Ok(buf)
}

/// Inverse DFT scaled by `1/n`, so that `fft_inverse(fft_forward(x)) == x`.
pub fn fft_inverse(spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
    if spectrum.is_empty() {
        return Err(Error::EmptySignal);
    }
    let mut buf = spectrum.to_vec();
    inverse_in_place(&mut buf);
    Ok(buf)
}

fn inverse_in_place(buf: &mut [Complex64]) {
    transform_in_place(buf, FftDirection::Inverse);
    let scale = 1.0 / buf.len() as f64;
    for z in buf.iter_mut() {
        *z *= scale;
    }
}

pub(crate) fn real_spectrum(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    transform_in_place(&mut buf, FftDirection::Forward);
    buf
}

/// Inverse transform of a Hermitian spectrum; returns the real part and the
/// largest discarded imaginary magnitude.
pub(crate) fn real_inverse(mut spectrum: Vec<Complex64>) -> (Vec<f64>, f64) {
    inverse_in_place(&mut spectrum);
    let residue = spectrum.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    (spectrum.into_iter().map(|z| z.re).collect(), residue)
}

/// Uniformly sampled real time series.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Signal {
    pub const MIN_LEN: usize = 2;

    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        validate_rate(sample_rate_hz)?;
        if samples.len() < Self::MIN_LEN {
            return Err(Error::SignalTooShort {
                min: Self::MIN_LEN,
                len: samples.len(),
            });
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Signal {
            samples,
            sample_rate_hz,
        })
    }

    /// Signal in normalized time (sample rate 1).
    pub fn normalized(samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, 1.0)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Copy with the sample mean subtracted.
    pub fn demeaned(&self) -> Signal {
        let mean = self.mean();
        Signal {
            samples: self.samples.iter().map(|x| x - mean).collect(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    /// Copy with every sample multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Signal> {
        Signal::new(self.samples.iter().map(|x| x * factor).collect(), self.sample_rate_hz)
    }
}

fn validate_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSampleRate(rate))
    }
}

/// `s + i H{s}`; the complex argument is the instantaneous phase.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSignal {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
}

impl AnalyticSignal {
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Imaginary part, i.e. the discrete Hilbert transform of the source.
    pub fn hilbert(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.im).collect()
    }

    pub fn phase(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.arg()).collect()
    }

    pub fn envelope(&self) -> Envelope {
        Envelope {
            samples: self.samples.iter().map(|z| z.norm()).collect(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

/// Instantaneous amplitude, `|s_a(t)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Envelope {
    /// Wraps externally computed amplitudes (must be finite and non-negative).
    pub fn from_samples(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        validate_rate(sample_rate_hz)?;
        if samples.len() < Signal::MIN_LEN {
            return Err(Error::SignalTooShort {
                min: Signal::MIN_LEN,
                len: samples.len(),
            });
        }
        for (i, &a) in samples.iter().enumerate() {
            if !a.is_finite() {
                return Err(Error::NonFiniteSample(i));
            }
            if a < 0.0 {
                return Err(Error::NegativeEnvelope(i));
            }
        }
        Ok(Envelope {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Passband `[low_cut, high_cut]` in cycles/sample, `0 <= low < high <= 0.5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    low_cut: f64,
    high_cut: f64,
}

impl FilterSpec {
    pub const FULL_BAND: FilterSpec = FilterSpec {
        low_cut: 0.0,
        high_cut: 0.5,
    };

    pub fn new(low_cut: f64, high_cut: f64) -> Result<Self> {
        let in_range = |f: f64| f.is_finite() && (0.0..=0.5).contains(&f);
        if !in_range(low_cut) || !in_range(high_cut) {
            return Err(Error::FilterOutOfRange {
                low: low_cut,
                high: high_cut,
            });
        }
        if high_cut <= low_cut {
            return Err(Error::EmptyPassband {
                low: low_cut,
                high: high_cut,
            });
        }
        Ok(FilterSpec { low_cut, high_cut })
    }

    pub fn low_cut(&self) -> f64 {
        self.low_cut
    }

    pub fn high_cut(&self) -> f64 {
        self.high_cut
    }

    pub fn is_full_band(&self) -> bool {
        self.low_cut == 0.0 && self.high_cut == 0.5
    }

    /// Whether DFT bin `k` of an `n`-point transform lies in the passband.
    /// Negative-frequency bins are judged by their absolute frequency.
    pub fn passes(&self, k: usize, n: usize) -> bool {
        let folded = k.min(n - k) as f64 / n as f64;
        folded >= self.low_cut && folded <= self.high_cut
    }

    pub(crate) fn apply_to_spectrum(&self, spectrum: &mut [Complex64]) {
        if self.is_full_band() {
            return;
        }
        let n = spectrum.len();
        for (k, z) in spectrum.iter_mut().enumerate() {
            if !self.passes(k, n) {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec::FULL_BAND
    }
}

/// One-sided weighting: DC x1, positive x2, Nyquist (even n) x1, negative x0.
pub(crate) fn apply_one_sided_weights(spectrum: &mut [Complex64]) {
    let n = spectrum.len();
    let half = n / 2;
    let positive_end = if n % 2 == 0 { half } else { half + 1 };
    for z in &mut spectrum[1..positive_end] {
        *z *= 2.0;
    }
    for z in &mut spectrum[half + 1..] {
        *z = Complex64::new(0.0, 0.0);
    }
}

/// Analytic signal from a real spectrum, optionally band limited first.
pub(crate) fn analytic_from_real(samples: &[f64], filter: Option<&FilterSpec>) -> Vec<Complex64> {
    let mut spectrum = real_spectrum(samples);
    if let Some(f) = filter {
        f.apply_to_spectrum(&mut spectrum);
    }
    apply_one_sided_weights(&mut spectrum);
    inverse_in_place(&mut spectrum);
    spectrum
}

pub fn analytic_signal(signal: &Signal) -> Result<AnalyticSignal> {
    if signal.len() < Signal::MIN_LEN {
        return Err(Error::SignalTooShort {
            min: Signal::MIN_LEN,
            len: signal.len(),
        });
    }
    Ok(AnalyticSignal {
        samples: analytic_from_real(signal.samples(), None),
        sample_rate_hz: signal.sample_rate_hz(),
    })
}

pub fn envelope(signal: &Signal) -> Result<Envelope> {
    Ok(analytic_signal(signal)?.envelope())
}

/// Ideal band-pass in the DFT domain: bins whose absolute normalized
/// frequency falls outside `[low_cut, high_cut]` are zeroed. The mask is
/// symmetric, so the output is real and has zero phase shift.
pub fn zero_phase_bandlimit(signal: &Signal, filter: &FilterSpec) -> Result<Signal> {
    if filter.is_full_band() {
        return Ok(signal.clone());
    }
    let mut spectrum = real_spectrum(signal.samples());
    filter.apply_to_spectrum(&mut spectrum);
    let (samples, _) = real_inverse(spectrum);
    Signal::new(samples, signal.sample_rate_hz())
}
