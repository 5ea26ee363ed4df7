//! Monte Carlo invariants spanning generators, calibration and analysis.

use envcv_core::calibration::histogram_mode;
use envcv_core::{
    build_null, classify, filtered_poisson, gaussian_noise, noisy_sinusoid, AmRegime, Error, FilterSpec, PulseShape,
    Seed,
};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    0.5 * (v[(n - 1) / 2] + v[n / 2])
}

const SEEDS: u64 = 200;

#[test]
fn sinusoid_cve_falls_with_snr() {
    let table = build_null(8000, &FilterSpec::FULL_BAND, 1000, Seed(1)).unwrap();
    let medians: Vec<f64> = [-20.0, -10.0, 0.0, 10.0, 20.0]
        .iter()
        .enumerate()
        .map(|(gi, &snr)| {
            let cves = (0..SEEDS)
                .map(|s| {
                    let sig = noisy_sinusoid(8000, 0.05, snr, Seed(100 + gi as u64).derive(s)).unwrap();
                    classify(&sig, &table, 0.05, false).unwrap().cve
                })
                .collect();
            median(cves)
        })
        .collect();
    assert!(medians.windows(2).all(|w| w[1] <= w[0]), "{medians:?}");
}

#[test]
fn poisson_cve_falls_with_rate() {
    let shape = PulseShape::default();
    let table = build_null(8000, &FilterSpec::FULL_BAND, 1000, Seed(2)).unwrap();
    let medians: Vec<f64> = [1e-3, 1e-2, 1e-1, 1.0]
        .iter()
        .enumerate()
        .map(|(gi, &rate)| {
            let cves = (0..SEEDS)
                .filter_map(|s| {
                    let sig = filtered_poisson(8000, rate, &shape, Seed(200 + gi as u64).derive(s)).unwrap();
                    match classify(&sig, &table, 0.05, true) {
                        Ok(r) => Some(r.cve),
                        Err(Error::UndefinedCve) => None,
                        Err(e) => panic!("{e}"),
                    }
                })
                .collect();
            median(cves)
        })
        .collect();
    assert!(medians.windows(2).all(|w| w[1] <= w[0]), "{medians:?}");
}

#[test]
fn full_band_tables_are_unimodal() {
    for n in [256, 1024, 4096] {
        let table = build_null(n, &FilterSpec::FULL_BAND, 20_000, Seed(3)).unwrap();
        let hist = table.histogram().unwrap();
        assert_eq!(hist.significant_maxima(4.0), 1, "n={n}: {:?}", hist.counts);
    }
}

#[test]
fn narrow_band_shifts_mode_down() {
    let full = build_null(8000, &FilterSpec::FULL_BAND, 10_000, Seed(4)).unwrap();
    let narrow = build_null(8000, &FilterSpec::new(0.0, 0.01).unwrap(), 10_000, Seed(4)).unwrap();
    assert!(narrow.mode < full.mode, "{} vs {}", narrow.mode, full.mode);
    assert!(narrow.std > full.std);
    assert_eq!(narrow.mode, histogram_mode(&narrow.cve_samples));
}

#[test]
fn gaussian_noise_passes_at_nominal_rate() {
    let table = build_null(256, &FilterSpec::FULL_BAND, 100_000, Seed(5)).unwrap();
    let alpha = 0.05;
    let passed = (0..10_000u64)
        .filter(|&i| {
            let epoch = gaussian_noise(256, 0.0, 1.0, Seed(6).derive(i)).unwrap();
            classify(&epoch, &table, alpha, false).unwrap().label == AmRegime::GaussianConsistent
        })
        .count();
    let rate = passed as f64 / 10_000.0;
    assert!(rate >= 1.0 - alpha - 0.01, "{rate}");
}

#[test]
fn low_rate_shot_noise_is_pulsating() {
    let table = build_null(8000, &FilterSpec::FULL_BAND, 2000, Seed(7)).unwrap();
    let shape = PulseShape::gaussian_bump(3.0, 2.0).unwrap();
    let votes = (0..50u64)
        .filter(|&s| {
            let sig = filtered_poisson(8000, 2e-3, &shape, Seed(8).derive(s)).unwrap();
            classify(&sig, &table, 0.05, true).unwrap().label == AmRegime::SuperGaussianPulsating
        })
        .count();
    assert!(votes > 40, "{votes}");
}
