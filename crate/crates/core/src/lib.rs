//! Gaussianity testing and amplitude-modulation classification with the
//! coefficient of variation of the Hilbert envelope (CVE).
//!
//! The envelope of zero-mean Gaussian noise is Rayleigh distributed, and
//! every Rayleigh law has the same coefficient of variation,
//! `m = sqrt((4 - pi) / pi) ~ 0.5227`. A finite epoch's CVE is compared with
//! a Monte Carlo null distribution for its length and passband: values below
//! the band indicate rhythmic (near-constant amplitude) signals, values above
//! it pulsating ones.
//!
//! ```
//! use envcv_core::{cve_of_signal, gaussian_noise, motokawa_m, Seed};
//!
//! let noise = gaussian_noise(100_000, 0.0, 1.0, Seed(7)).unwrap();
//! let stats = cve_of_signal(&noise, None, false).unwrap();
//! assert!((stats.cve - motokawa_m()).abs() < 0.01);
//! ```

pub mod analysis;
pub mod bessel;
pub mod calibration;
mod error;
pub mod fading;
pub mod generators;
mod parallel;
pub mod rng;
pub mod signal;
pub mod stats;
pub mod surrogates;

pub use analysis::{
    classify, estimator_bias_experiment, estimator_variance_experiment, sensitivity_experiment, AmRegime,
    ClassificationResult, Estimator, EstimatorReport, Experiment,
};
pub use calibration::{
    build_null, build_null_with_workers, interval, load_table, save_table, ConfidenceInterval, EstimatorMetadata,
    NullDistribution, SampleStorage,
};
pub use error::{Error, Result};
pub use fading::{
    motokawa_m, rayleigh_moments, rayleigh_pdf, rician_cv, rician_moments, rician_pdf, RayleighParams, RicianParams,
    MOTOKAWA_M,
};
pub use generators::{filtered_poisson, gaussian_noise, noisy_sinusoid, two_tone, PulseKind, PulseShape};
pub use parallel::with_workers;
pub use rng::Seed;
pub use signal::{
    analytic_signal, envelope, fft_forward, fft_inverse, zero_phase_bandlimit, AnalyticSignal, Envelope, FilterSpec,
    Signal,
};
pub use stats::{cve_of_envelope, cve_of_signal, excess_kurtosis, skewness, EnvelopeStats, MomentStats};
pub use surrogates::{ftpr, SurrogateBatch};

/// Complex sample type used by the FFT routines.
pub use rustfft::num_complex::Complex64;
