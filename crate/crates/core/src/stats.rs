//! Sample statistics: envelope coefficient of variation, skewness and excess
//! kurtosis.
//!
//! The CVE uses the `n - 1` standard deviation; skewness and kurtosis use
//! the biased moment forms `m3 / m2^1.5` and `m4 / m2^2 - 3`.

use crate::error::{Error, Result};
use crate::signal::{self, Envelope, FilterSpec, Signal};

/// Standard-deviation divisor, recorded in calibration metadata.
pub const STD_DIVISOR: &str = "n-1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeStats {
    pub mean: f64,
    pub std: f64,
    pub cve: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentStats {
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub n: usize,
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Two-pass sample standard deviation with divisor `n - 1`.
pub fn sample_std(samples: &[f64]) -> f64 {
    let m = mean(samples);
    let ss: f64 = samples.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (samples.len() - 1) as f64).sqrt()
}

pub fn cve_of_envelope(env: &Envelope) -> Result<EnvelopeStats> {
    cve_of_amplitudes(env.samples())
}

fn cve_of_amplitudes(a: &[f64]) -> Result<EnvelopeStats> {
    if a.len() < 2 {
        return Err(Error::SignalTooShort { min: 2, len: a.len() });
    }
    let mean = mean(a);
    if mean.is_nan() || mean <= 0.0 {
        return Err(Error::UndefinedCve);
    }
    let std = sample_std(a);
    Ok(EnvelopeStats {
        mean,
        std,
        cve: std / mean,
        n: a.len(),
    })
}

/// Optional demeaning, optional band limiting, Hilbert envelope, CV.
///
/// This is the one pipeline shared by calibration, classification and the
/// benchmarks. A full-band filter is skipped entirely, so passing
/// `Some(&FilterSpec::FULL_BAND)` and `None` give bit-identical results.
pub fn cve_of_signal(signal: &Signal, filter: Option<&FilterSpec>, demean: bool) -> Result<EnvelopeStats> {
    let demeaned;
    let source = if demean {
        demeaned = signal.demeaned();
        &demeaned
    } else {
        signal
    };
    match filter.filter(|f| !f.is_full_band()) {
        None => cve_of_envelope(&signal::envelope(source)?),
        Some(f) => {
            // Band limiting and the one-sided weighting share one spectrum.
            let analytic = signal::analytic_from_real(source.samples(), Some(f));
            let amplitudes: Vec<f64> = analytic.iter().map(|z| z.norm()).collect();
            cve_of_amplitudes(&amplitudes)
        }
    }
}

struct CentralMoments {
    m2: f64,
    m3: f64,
    m4: f64,
}

fn central_moments(samples: &[f64]) -> Result<CentralMoments> {
    let n = samples.len() as f64;
    let m = mean(samples);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in samples {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    // Rounding in the mean leaves ~eps * |x| residuals for constant input.
    let scale = samples.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    let floor = 64.0 * f64::EPSILON * scale;
    if m2.is_nan() || m2 <= floor * floor {
        return Err(Error::DegenerateSample);
    }
    Ok(CentralMoments { m2, m3, m4 })
}

pub fn skewness(samples: &[f64]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::SignalTooShort {
            min: 3,
            len: samples.len(),
        });
    }
    let c = central_moments(samples)?;
    Ok(c.m3 / c.m2.powf(1.5))
}

pub fn excess_kurtosis(samples: &[f64]) -> Result<f64> {
    if samples.len() < 4 {
        return Err(Error::SignalTooShort {
            min: 4,
            len: samples.len(),
        });
    }
    let c = central_moments(samples)?;
    Ok(c.m4 / (c.m2 * c.m2) - 3.0)
}

pub fn moment_stats(samples: &[f64]) -> Result<MomentStats> {
    if samples.len() < 4 {
        return Err(Error::SignalTooShort {
            min: 4,
            len: samples.len(),
        });
    }
    let c = central_moments(samples)?;
    Ok(MomentStats {
        skewness: c.m3 / c.m2.powf(1.5),
        excess_kurtosis: c.m4 / (c.m2 * c.m2) - 3.0,
        n: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::{motokawa_m, RayleighParams};
    use crate::rng::Seed;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = Seed(seed).rng();
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn constant_envelope_has_zero_cve() {
        let env = Envelope::from_samples(vec![2.0; 4], 1.0).unwrap();
        let s = cve_of_envelope(&env).unwrap();
        assert_eq!(s.cve, 0.0);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.n, 4);
    }

    #[test]
    fn zero_envelope_is_rejected() {
        let env = Envelope::from_samples(vec![0.0; 16], 1.0).unwrap();
        assert!(matches!(cve_of_envelope(&env), Err(Error::UndefinedCve)));
        let sig = Signal::normalized(vec![0.0; 16]).unwrap();
        assert!(matches!(cve_of_signal(&sig, None, false), Err(Error::UndefinedCve)));
    }

    #[test]
    fn rayleigh_draws_have_cv_m() {
        // Inverse-CDF Rayleigh sampling, independent of the Hilbert path.
        let p = RayleighParams::new(1.0).unwrap();
        let mut rng = Seed(8).rng();
        let draws: Vec<f64> = (0..1_000_000)
            .map(|_| {
                let u: f64 = rng.random();
                p.sigma() * (-2.0 * (1.0 - u).ln()).sqrt()
            })
            .collect();
        let s = cve_of_envelope(&Envelope::from_samples(draws, 1.0).unwrap()).unwrap();
        assert!((s.cve - 0.5227).abs() < 0.002);
    }

    #[test]
    fn gaussian_noise_envelope_cve_is_m() {
        let sig = Signal::normalized(normals(1_000_000, 9)).unwrap();
        let s = cve_of_signal(&sig, None, false).unwrap();
        assert!((s.cve - 0.523).abs() < 0.005, "{}", s.cve);
        assert!((s.cve - motokawa_m()).abs() < 0.005);
    }

    #[test]
    fn pure_tone_cve_is_near_zero() {
        let sig = Signal::normalized((0..4096).map(|k| (2.0 * PI * 0.125 * k as f64).sin()).collect()).unwrap();
        assert!(cve_of_signal(&sig, None, false).unwrap().cve < 1e-9);
    }

    #[test]
    fn unfiltered_pipeline_agrees_with_envelope() {
        let sig = Signal::normalized(normals(500, 10)).unwrap();
        let direct = cve_of_envelope(&signal::envelope(&sig).unwrap()).unwrap();
        assert_eq!(cve_of_signal(&sig, None, false).unwrap(), direct);
        assert_eq!(
            cve_of_signal(&sig, Some(&FilterSpec::FULL_BAND), false).unwrap(),
            direct
        );
    }

    #[test]
    fn fused_filter_path_agrees_with_staged_path() {
        let sig = Signal::normalized(normals(777, 12)).unwrap();
        let f = FilterSpec::new(0.01, 0.2).unwrap();
        let staged =
            cve_of_envelope(&signal::envelope(&signal::zero_phase_bandlimit(&sig, &f).unwrap()).unwrap()).unwrap();
        let fused = cve_of_signal(&sig, Some(&f), false).unwrap();
        assert!((staged.cve - fused.cve).abs() < 1e-12);
    }

    #[test]
    fn demeaning_removes_rician_offset() {
        let offset: Vec<f64> = normals(50_000, 13).iter().map(|x| x + 5.0).collect();
        let sig = Signal::normalized(offset).unwrap();
        let raw = cve_of_signal(&sig, None, false).unwrap().cve;
        let centered = cve_of_signal(&sig, None, true).unwrap().cve;
        assert!(raw < 0.25);
        assert!((centered - motokawa_m()).abs() < 0.02);
    }

    #[test]
    fn skewness_values() {
        assert!(skewness(&[-1.0, 0.0, 1.0]).unwrap().abs() < 1e-15);
        // m2 = 3/16, m3 = 3/32 -> (3/32) / (3/16)^1.5
        let expected = (3.0 / 32.0) / (3.0f64 / 16.0).powf(1.5);
        assert!((skewness(&[0.0, 0.0, 0.0, 1.0]).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 1.1547).abs() < 1e-4);
        assert!(skewness(&normals(1_000_000, 14)).unwrap().abs() < 0.01);
    }

    #[test]
    fn kurtosis_values() {
        assert!((excess_kurtosis(&[-1.0, 1.0, -1.0, 1.0]).unwrap() + 2.0).abs() < 1e-12);
        assert!(excess_kurtosis(&normals(1_000_000, 15)).unwrap().abs() < 0.02);
        // Laplace(0, 1) by inverse CDF; excess kurtosis 3.
        let mut rng = Seed(16).rng();
        let laplace: Vec<f64> = (0..1_000_000)
            .map(|_| {
                let u: f64 = rng.random::<f64>() - 0.5;
                -u.signum() * (1.0 - 2.0 * u.abs()).ln()
            })
            .collect();
        assert!((excess_kurtosis(&laplace).unwrap() - 3.0).abs() < 0.1);
    }

    #[test]
    fn degenerate_and_short_samples() {
        assert!(matches!(skewness(&[0.1, 0.1, 0.1]), Err(Error::DegenerateSample)));
        assert!(matches!(excess_kurtosis(&[3.3; 10]), Err(Error::DegenerateSample)));
        assert!(matches!(skewness(&[1.0, 2.0]), Err(Error::SignalTooShort { .. })));
        assert!(matches!(
            excess_kurtosis(&[1.0, 2.0, 3.0]),
            Err(Error::SignalTooShort { .. })
        ));
    }

    #[test]
    fn moment_stats_agrees() {
        let x = normals(100, 17);
        let m = moment_stats(&x).unwrap();
        assert_eq!(m.skewness, skewness(&x).unwrap());
        assert_eq!(m.excess_kurtosis, excess_kurtosis(&x).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scale_invariance(seed in 0u64..1000, c in 0.01f64..100.0) {
            let x = normals(64, seed);
            let y: Vec<f64> = x.iter().map(|v| v * c).collect();
            let cx = cve_of_signal(&Signal::normalized(x.clone()).unwrap(), None, false).unwrap().cve;
            let cy = cve_of_signal(&Signal::normalized(y.clone()).unwrap(), None, false).unwrap().cve;
            prop_assert!((cx - cy).abs() < 1e-9);
            prop_assert!((skewness(&x).unwrap() - skewness(&y).unwrap()).abs() < 1e-9);
            prop_assert!((excess_kurtosis(&x).unwrap() - excess_kurtosis(&y).unwrap()).abs() < 1e-9);
            let neg: Vec<f64> = x.iter().map(|v| -v * c).collect();
            prop_assert!((skewness(&x).unwrap() + skewness(&neg).unwrap()).abs() < 1e-9);
        }

        #[test]
        fn moments_translation_invariant(seed in 0u64..1000, shift in -50.0f64..50.0) {
            let x = normals(64, seed);
            let y: Vec<f64> = x.iter().map(|v| v + shift).collect();
            prop_assert!((skewness(&x).unwrap() - skewness(&y).unwrap()).abs() < 1e-8);
            prop_assert!((excess_kurtosis(&x).unwrap() - excess_kurtosis(&y).unwrap()).abs() < 1e-8);
        }
    }
}
