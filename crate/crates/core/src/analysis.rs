//! CVE Gaussianity test with amplitude-modulation labels, and the
//! estimator-quality experiments comparing CVE with skewness and kurtosis.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};

use crate::calibration::{interval, ConfidenceInterval, EstimatorMetadata, NullDistribution};
use crate::error::{Error, Result};
use crate::fading::motokawa_m;
use crate::generators::gaussian_noise;
use crate::parallel;
use crate::rng::Seed;
use crate::signal::{FilterSpec, Signal};
use crate::stats::{self, cve_of_signal, excess_kurtosis, skewness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AmRegime {
    /// CVE below the Gaussian band: near-constant amplitude.
    SubGaussianRhythmic,
    GaussianConsistent,
    /// CVE above the Gaussian band: bursty amplitude.
    SuperGaussianPulsating,
}

impl AmRegime {
    pub fn from_interval(cve: f64, ci: &ConfidenceInterval) -> Self {
        if cve < ci.lower {
            AmRegime::SubGaussianRhythmic
        } else if cve > ci.upper {
            AmRegime::SuperGaussianPulsating
        } else {
            AmRegime::GaussianConsistent
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AmRegime::SubGaussianRhythmic => "SubGaussianRhythmic",
            AmRegime::GaussianConsistent => "GaussianConsistent",
            AmRegime::SuperGaussianPulsating => "SuperGaussianPulsating",
        }
    }
}

impl fmt::Display for AmRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationResult {
    pub cve: f64,
    pub interval: ConfidenceInterval,
    pub label: AmRegime,
    pub n: usize,
    pub filter: FilterSpec,
    pub alpha: f64,
}

/// Tests `signal` against `table` at level `alpha`, using the table's
/// passband.
pub fn classify(signal: &Signal, table: &NullDistribution, alpha: f64, demean: bool) -> Result<ClassificationResult> {
    if signal.len() != table.n {
        return Err(Error::LengthMismatch {
            signal: signal.len(),
            table: table.n,
        });
    }
    let current = EstimatorMetadata::current();
    if !table.metadata.compatible_with(&current) {
        return Err(Error::PipelineMismatch(format!(
            "table built with hilbert_method={} std_divisor={}, this build uses {} / {}",
            table.metadata.hilbert_method, table.metadata.std_divisor, current.hilbert_method, current.std_divisor
        )));
    }
    let ci = interval(table, alpha)?;
    let cve = cve_of_signal(signal, Some(&table.filter), demean)?.cve;
    Ok(ClassificationResult {
        cve,
        interval: ci,
        label: AmRegime::from_interval(cve, &ci),
        n: table.n,
        filter: table.filter,
        alpha,
    })
}

// ---------------------------------------------------------------------------
// Estimator experiments
// ---------------------------------------------------------------------------

pub const MIN_EXPERIMENT_TRIALS: usize = 10_000;
/// Base sample size of the outlier-sensitivity experiment.
pub const SENSITIVITY_BASE_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    Cve,
    Skewness,
    Kurtosis,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Cve, Estimator::Skewness, Estimator::Kurtosis];

    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Cve => "cve",
            Estimator::Skewness => "skewness",
            Estimator::Kurtosis => "kurtosis",
        }
    }

    /// Value the estimator converges to on Gaussian input.
    pub fn gaussian_limit(self) -> f64 {
        match self {
            Estimator::Cve => motokawa_m(),
            Estimator::Skewness | Estimator::Kurtosis => 0.0,
        }
    }

    pub fn evaluate(self, samples: &[f64]) -> Result<f64> {
        match self {
            Estimator::Cve => Ok(cve_of_signal(&Signal::normalized(samples.to_vec())?, None, false)?.cve),
            Estimator::Skewness => skewness(samples),
            Estimator::Kurtosis => excess_kurtosis(samples),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Variance,
    Bias,
    Sensitivity,
}

impl Experiment {
    pub const NAMES: [&'static str; 3] = ["variance", "bias", "sensitivity"];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Variance => "variance",
            Experiment::Bias => "bias",
            Experiment::Sensitivity => "sensitivity",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variance" => Ok(Experiment::Variance),
            "bias" => Ok(Experiment::Bias),
            "sensitivity" => Ok(Experiment::Sensitivity),
            other => Err(Error::param(
                "experiment",
                format!(
                    "unknown experiment `{other}`; expected one of {}",
                    Experiment::NAMES.join(", ")
                ),
            )),
        }
    }
}

/// Curves for one estimator. Each experiment fills its own curve; the others
/// stay empty.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub estimator: Estimator,
    pub sample_sizes: Vec<usize>,
    pub variance_curve: Vec<f64>,
    pub bias_curve: Vec<f64>,
    /// `(outlier magnitude, mean absolute shift)`.
    pub sensitivity_curve: Vec<(f64, f64)>,
}

impl EstimatorReport {
    fn empty(estimator: Estimator) -> Self {
        EstimatorReport {
            estimator,
            sample_sizes: Vec::new(),
            variance_curve: Vec::new(),
            bias_curve: Vec::new(),
            sensitivity_curve: Vec::new(),
        }
    }

    pub fn variance_at(&self, n: usize) -> Option<f64> {
        self.sample_sizes
            .iter()
            .position(|&s| s == n)
            .map(|i| self.variance_curve[i])
    }

    pub fn bias_at(&self, n: usize) -> Option<f64> {
        self.sample_sizes
            .iter()
            .position(|&s| s == n)
            .map(|i| self.bias_curve[i])
    }

    pub fn shift_at(&self, magnitude: f64) -> Option<f64> {
        self.sensitivity_curve
            .iter()
            .find(|(c, _)| *c == magnitude)
            .map(|(_, s)| *s)
    }
}

pub fn report_for(reports: &[EstimatorReport], estimator: Estimator) -> Option<&EstimatorReport> {
    reports.iter().find(|r| r.estimator == estimator)
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_EXPERIMENT_TRIALS {
        Err(Error::InsufficientTrials {
            got: trials,
            min: MIN_EXPERIMENT_TRIALS,
        })
    } else {
        Ok(())
    }
}

fn check_sizes(sample_sizes: &[usize]) -> Result<()> {
    if sample_sizes.is_empty() {
        return Err(Error::param("sample_sizes", "grid is empty"));
    }
    if let Some(&n) = sample_sizes.iter().find(|&&n| n < 4) {
        return Err(Error::param(
            "sample_sizes",
            format!("every size must be at least 4, got {n}"),
        ));
    }
    Ok(())
}

/// Per-size draws of all three estimators on Gaussian epochs, indexed
/// `[size][estimator][trial]`.
fn gaussian_estimates(sample_sizes: &[usize], trials: usize, seed: Seed) -> Result<Vec<[Vec<f64>; 3]>> {
    sample_sizes
        .iter()
        .enumerate()
        .map(|(gi, &n)| {
            let grid_seed = seed.derive(gi as u64);
            let rows = parallel::try_map_trials(trials, |t| {
                let epoch = gaussian_noise(n, 0.0, 1.0, grid_seed.derive(t))?;
                let cve = cve_of_signal(&epoch, None, false)?.cve;
                let m = stats::moment_stats(epoch.samples())?;
                Ok([cve, m.skewness, m.excess_kurtosis])
            })?;
            let mut cols: [Vec<f64>; 3] = Default::default();
            for row in rows {
                for (col, v) in cols.iter_mut().zip(row) {
                    col.push(v);
                }
            }
            Ok(cols)
        })
        .collect()
}

/// Across-trial variance of each estimator at each sample size.
pub fn estimator_variance_experiment(
    sample_sizes: &[usize],
    trials: usize,
    seed: Seed,
) -> Result<Vec<EstimatorReport>> {
    check_sizes(sample_sizes)?;
    check_trials(trials)?;
    let draws = gaussian_estimates(sample_sizes, trials, seed)?;
    Ok(Estimator::ALL
        .iter()
        .enumerate()
        .map(|(ei, &e)| EstimatorReport {
            sample_sizes: sample_sizes.to_vec(),
            variance_curve: draws.iter().map(|d| stats::sample_std(&d[ei]).powi(2)).collect(),
            ..EstimatorReport::empty(e)
        })
        .collect())
}

/// Mean estimate minus the Gaussian limit (`m` for CVE, 0 otherwise).
pub fn estimator_bias_experiment(sample_sizes: &[usize], trials: usize, seed: Seed) -> Result<Vec<EstimatorReport>> {
    check_sizes(sample_sizes)?;
    check_trials(trials)?;
    let draws = gaussian_estimates(sample_sizes, trials, seed)?;
    Ok(Estimator::ALL
        .iter()
        .enumerate()
        .map(|(ei, &e)| EstimatorReport {
            sample_sizes: sample_sizes.to_vec(),
            bias_curve: draws.iter().map(|d| stats::mean(&d[ei]) - e.gaussian_limit()).collect(),
            ..EstimatorReport::empty(e)
        })
        .collect())
}

/// Mean absolute change of each estimator when one outlier of magnitude `c`
/// is appended to 20 standard normal draws. Trial `t` uses the same base
/// draws for every magnitude.
pub fn sensitivity_experiment(outlier_magnitudes: &[f64], trials: usize, seed: Seed) -> Result<Vec<EstimatorReport>> {
    if outlier_magnitudes.is_empty() {
        return Err(Error::param("outlier_magnitudes", "grid is empty"));
    }
    if let Some(c) = outlier_magnitudes.iter().find(|c| !c.is_finite()) {
        return Err(Error::param("outlier_magnitudes", format!("must be finite, got {c}")));
    }
    check_trials(trials)?;
    let rows = parallel::try_map_trials(trials, |t| {
        let mut rng = seed.derive(t).rng();
        let mut x: Vec<f64> = (0..SENSITIVITY_BASE_LEN)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let base: Vec<f64> = Estimator::ALL.iter().map(|e| e.evaluate(&x)).collect::<Result<_>>()?;
        x.push(0.0);
        outlier_magnitudes
            .iter()
            .map(|&c| {
                *x.last_mut().unwrap() = c;
                Estimator::ALL
                    .iter()
                    .zip(&base)
                    .map(|(e, b)| Ok((e.evaluate(&x)? - b).abs()))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<Vec<f64>>>>()
    })?;
    Ok(Estimator::ALL
        .iter()
        .enumerate()
        .map(|(ei, &e)| EstimatorReport {
            sensitivity_curve: outlier_magnitudes
                .iter()
                .enumerate()
                .map(|(ci, &c)| {
                    let total: f64 = rows.iter().map(|r| r[ci][ei]).sum();
                    (c, total / trials as f64)
                })
                .collect(),
            ..EstimatorReport::empty(e)
        })
        .collect())
}

/// CSV rows `experiment,estimator,grid,value`, one per estimator and grid
/// point.
pub fn write_reports_csv<W: Write>(
    experiment: Experiment,
    reports: &[EstimatorReport],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "experiment,estimator,grid,value")?;
    for r in reports {
        match experiment {
            Experiment::Variance => {
                for (n, v) in r.sample_sizes.iter().zip(&r.variance_curve) {
                    writeln!(out, "variance,{},{n},{v}", r.estimator)?;
                }
            }
            Experiment::Bias => {
                for (n, v) in r.sample_sizes.iter().zip(&r.bias_curve) {
                    writeln!(out, "bias,{},{n},{v}", r.estimator)?;
                }
            }
            Experiment::Sensitivity => {
                for (c, v) in &r.sensitivity_curve {
                    writeln!(out, "sensitivity,{},{c},{v}", r.estimator)?;
                }
            }
        }
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::build_null;
    use crate::generators::{filtered_poisson, noisy_sinusoid, PulseShape};

    fn table(n: usize, trials: usize) -> NullDistribution {
        build_null(n, &FilterSpec::FULL_BAND, trials, Seed(99)).unwrap()
    }

    #[test]
    fn label_follows_interval() {
        let ci = ConfidenceInterval {
            lower: 0.4,
            upper: 0.6,
            alpha: 0.05,
        };
        assert_eq!(AmRegime::from_interval(0.39, &ci), AmRegime::SubGaussianRhythmic);
        assert_eq!(AmRegime::from_interval(0.4, &ci), AmRegime::GaussianConsistent);
        assert_eq!(AmRegime::from_interval(0.6, &ci), AmRegime::GaussianConsistent);
        assert_eq!(AmRegime::from_interval(0.61, &ci), AmRegime::SuperGaussianPulsating);
    }

    #[test]
    fn classify_checks_length_and_metadata() {
        let t = table(64, 1000);
        let s = gaussian_noise(65, 0.0, 1.0, Seed(1)).unwrap();
        let err = classify(&s, &t, 0.05, false).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { signal: 65, table: 64 }));
        let msg = err.to_string();
        assert!(msg.contains("65") && msg.contains("64"));

        let mut foreign = t.clone();
        foreign.metadata.hilbert_method = "fir-remez".into();
        let s = gaussian_noise(64, 0.0, 1.0, Seed(1)).unwrap();
        let err = classify(&s, &foreign, 0.05, false).unwrap_err();
        assert!(err.to_string().starts_with("table/pipeline mismatch"));
    }

    #[test]
    fn regimes_at_8000() {
        let t = table(8000, 2000);
        let tone = noisy_sinusoid(8000, 0.05, 30.0, Seed(2)).unwrap();
        assert_eq!(
            classify(&tone, &t, 0.05, false).unwrap().label,
            AmRegime::SubGaussianRhythmic
        );
        let shape = PulseShape::default();
        let pulsating = (0..50)
            .filter(|&i| {
                let s = filtered_poisson(8000, 1e-3, &shape, Seed(100 + i)).unwrap();
                matches!(classify(&s, &t, 0.05, true), Ok(r) if r.label == AmRegime::SuperGaussianPulsating)
            })
            .count();
        assert!(pulsating > 25, "{pulsating}");
    }

    #[test]
    fn gaussian_epochs_mostly_consistent() {
        let t = table(256, 5000);
        let hits = (0..1000)
            .filter(|&i| {
                let s = gaussian_noise(256, 0.0, 1.0, Seed(10_000 + i)).unwrap();
                classify(&s, &t, 0.05, false).unwrap().label == AmRegime::GaussianConsistent
            })
            .count();
        assert!((900..=990).contains(&hits), "{hits}");
    }

    #[test]
    fn classification_is_scale_invariant() {
        let t = table(128, 1000);
        for i in 0..20 {
            let s = gaussian_noise(128, 0.0, 1.0, Seed(i)).unwrap();
            let a = classify(&s, &t, 0.1, false).unwrap();
            let b = classify(&s.scaled(37.0).unwrap(), &t, 0.1, false).unwrap();
            assert_eq!(a.label, b.label);
            assert!((a.cve - b.cve).abs() < 1e-9);
        }
    }

    #[test]
    fn experiment_validation() {
        assert!(estimator_variance_experiment(&[], 10_000, Seed(0)).is_err());
        assert!(estimator_variance_experiment(&[32], 100, Seed(0)).is_err());
        assert!(estimator_bias_experiment(&[3], 10_000, Seed(0)).is_err());
        assert!(sensitivity_experiment(&[], 10_000, Seed(0)).is_err());
        assert!("noise".parse::<Experiment>().is_err());
        assert_eq!("bias".parse::<Experiment>().unwrap(), Experiment::Bias);
    }

    #[test]
    fn variance_ordering_and_skewness_oracle() {
        let sizes = [32, 128, 512, 2048];
        let reports = estimator_variance_experiment(&sizes, 10_000, Seed(3)).unwrap();
        let get = |e| report_for(&reports, e).unwrap();
        for &n in &sizes {
            let cve = get(Estimator::Cve).variance_at(n).unwrap();
            assert!(cve < get(Estimator::Skewness).variance_at(n).unwrap());
            assert!(cve < get(Estimator::Kurtosis).variance_at(n).unwrap());
        }
        for e in Estimator::ALL {
            assert!(get(e).variance_curve.windows(2).all(|w| w[1] < w[0]), "{e}");
        }
        // Large-n variance of Gaussian sample skewness is 6/n.
        let v = get(Estimator::Skewness).variance_at(2048).unwrap();
        assert!((v / (6.0 / 2048.0) - 1.0).abs() < 0.2, "{v}");
    }

    #[test]
    fn experiments_are_deterministic() {
        let a = estimator_bias_experiment(&[16, 32], 10_000, Seed(4)).unwrap();
        let b = estimator_bias_experiment(&[16, 32], 10_000, Seed(4)).unwrap();
        assert_eq!(a, b);
        let c = sensitivity_experiment(&[0.0, 5.0], 10_000, Seed(4)).unwrap();
        let d = sensitivity_experiment(&[0.0, 5.0], 10_000, Seed(4)).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn sensitivity_baseline_and_ordering() {
        let reports = sensitivity_experiment(&[0.0, 3.0, 5.0, 10.0], 10_000, Seed(5)).unwrap();
        let shift = |e, c| report_for(&reports, e).unwrap().shift_at(c).unwrap();
        for e in Estimator::ALL {
            let zero = shift(e, 0.0);
            assert!(zero > 0.0 && zero.is_finite());
            assert!(zero < shift(e, 5.0));
        }
        for c in [3.0, 5.0, 10.0] {
            assert!(shift(Estimator::Cve, c) < shift(Estimator::Kurtosis, c), "c = {c}");
        }
        assert!(shift(Estimator::Cve, 5.0) < shift(Estimator::Skewness, 5.0));
    }

    #[test]
    fn csv_rows() {
        let reports = sensitivity_experiment(&[1.0, 2.0], 10_000, Seed(6)).unwrap();
        let mut buf = Vec::new();
        write_reports_csv(Experiment::Sensitivity, &reports, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "experiment,estimator,grid,value");
        assert_eq!(lines.len(), 1 + 3 * 2);
        assert!(lines[1].starts_with("sensitivity,cve,1,"));
    }
}
