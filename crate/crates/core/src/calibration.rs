//! Monte Carlo null distributions of the CVE under Gaussianity.
//!
//! A [`NullDistribution`] is keyed by epoch length and passband. Trials are
//! independent standard Gaussian epochs pushed through
//! [`cve_of_signal`](crate::stats::cve_of_signal); trial `i` draws from
//! `seed.derive(i)` and results are gathered in index order, so a table is a
//! function of `(n, filter, trials, seed)` alone.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::generators::gaussian_noise;
use crate::parallel;
use crate::rng::{self, Seed};
use crate::signal::{self, FilterSpec};
use crate::stats::{self, cve_of_signal};

pub const MIN_TRIALS: usize = 1000;
pub const MIN_EPOCH_LEN: usize = 16;
pub const DEFAULT_TRIALS: usize = 100_000;
/// Above this many trials only a quantile grid is retained.
pub const FULL_SAMPLE_LIMIT: usize = 100_000;
pub const GRID_POINTS: usize = 1001;

pub const TABLE_MAGIC: &str = "envcv-calibration-table";
pub const SCHEMA_VERSION: u32 = 1;

/// Identifies the estimator pipeline a table was built with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimatorMetadata {
    pub rng_name: String,
    pub gaussian_sampler: String,
    pub hilbert_method: String,
    pub std_divisor: String,
}

impl EstimatorMetadata {
    /// The pipeline compiled into this build.
    pub fn current() -> Self {
        EstimatorMetadata {
            rng_name: rng::RNG_NAME.to_string(),
            gaussian_sampler: rng::GAUSSIAN_SAMPLER.to_string(),
            hilbert_method: signal::HILBERT_METHOD.to_string(),
            std_divisor: stats::STD_DIVISOR.to_string(),
        }
    }

    /// Fields that change the CVE statistic itself. The RNG fields only
    /// affect which Gaussian draws were used.
    pub fn compatible_with(&self, other: &EstimatorMetadata) -> bool {
        self.hilbert_method == other.hilbert_method && self.std_divisor == other.std_divisor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleStorage {
    /// Every trial CVE, sorted.
    Full,
    /// Quantiles at `p = i / (len - 1)`.
    QuantileGrid,
}

impl SampleStorage {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleStorage::Full => "samples",
            SampleStorage::QuantileGrid => "quantile-grid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    pub n: usize,
    pub filter: FilterSpec,
    pub trials: usize,
    pub storage: SampleStorage,
    /// Sorted ascending; either all trial values or the retained grid.
    pub cve_samples: Vec<f64>,
    pub mode: f64,
    pub mean: f64,
    pub std: f64,
    pub seed: Seed,
    pub metadata: EstimatorMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
}

impl ConfidenceInterval {
    /// Two-sided interval `[q(alpha/2), q(1 - alpha/2)]` from sorted values.
    pub fn from_sorted(sorted: &[f64], alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")));
        }
        if sorted.is_empty() {
            return Err(Error::EmptySignal);
        }
        Ok(ConfidenceInterval {
            lower: quantile_sorted(sorted, alpha / 2.0),
            upper: quantile_sorted(sorted, 1.0 - alpha / 2.0),
            alpha,
        })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Linear interpolation between order statistics ("type 7").
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Equal-width histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub start: f64,
    pub width: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Freedman–Diaconis bin width `2 IQR n^(-1/3)` over `[min, max]`.
    /// Returns `None` for fewer than two values or zero spread.
    pub fn freedman_diaconis(sorted: &[f64]) -> Option<Histogram> {
        let n = sorted.len();
        if n < 2 {
            return None;
        }
        let (min, max) = (sorted[0], sorted[n - 1]);
        let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
        let span = max - min;
        if span.is_nan() || span <= 0.0 {
            return None;
        }
        let mut width = 2.0 * iqr / (n as f64).cbrt();
        if width.is_nan() || width <= 0.0 {
            width = span;
        }
        let bins = ((span / width).ceil() as usize).clamp(1, 1 << 20);
        let width = span / bins as f64;
        let mut counts = vec![0usize; bins];
        for &x in sorted {
            let idx = (((x - min) / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Some(Histogram {
            start: min,
            width,
            counts,
        })
    }

    pub fn mode(&self) -> f64 {
        let (idx, _) = self
            .counts
            .iter()
            .enumerate()
            .fold((0, 0), |best, (i, &c)| if c > best.1 { (i, c) } else { best });
        self.start + (idx as f64 + 0.5) * self.width
    }

    /// Number of strict local maxima, counting plateaus once.
    pub fn local_maxima(&self) -> usize {
        // Collapse runs of equal counts, then look for peaks.
        let mut runs: Vec<usize> = Vec::with_capacity(self.counts.len());
        for &c in &self.counts {
            if runs.last() != Some(&c) {
                runs.push(c);
            }
        }
        (0..runs.len())
            .filter(|&i| {
                let left = i == 0 || runs[i - 1] < runs[i];
                let right = i + 1 == runs.len() || runs[i + 1] < runs[i];
                left && right
            })
            .count()
    }

    /// Local maxima whose prominence exceeds `z` standard deviations of the
    /// Poisson counting noise, `z * sqrt(peak + col)`. The tallest bin always
    /// counts. Use this instead of [`Histogram::local_maxima`] on Monte Carlo
    /// histograms, whose sparse tails produce spurious one-count peaks.
    pub fn significant_maxima(&self, z: f64) -> usize {
        let mut runs: Vec<f64> = Vec::with_capacity(self.counts.len());
        for &c in &self.counts {
            let c = c as f64;
            if runs.last() != Some(&c) {
                runs.push(c);
            }
        }
        let side_col = |i: usize, step: isize| -> Option<f64> {
            let mut low = runs[i];
            let mut j = i as isize + step;
            while j >= 0 && (j as usize) < runs.len() {
                let v = runs[j as usize];
                if v > runs[i] {
                    return Some(low);
                }
                low = low.min(v);
                j += step;
            }
            None
        };
        (0..runs.len())
            .filter(|&i| {
                let left = i == 0 || runs[i - 1] < runs[i];
                let right = i + 1 == runs.len() || runs[i + 1] < runs[i];
                if !(left && right) {
                    return false;
                }
                let col = match (side_col(i, -1), side_col(i, 1)) {
                    (None, None) => return true,
                    (Some(a), None) | (None, Some(a)) => a,
                    (Some(a), Some(b)) => a.max(b),
                };
                runs[i] - col > z * (runs[i] + col).sqrt()
            })
            .count()
    }
}

/// Histogram mode (midpoint of the tallest Freedman–Diaconis bin).
pub fn histogram_mode(sorted: &[f64]) -> f64 {
    match Histogram::freedman_diaconis(sorted) {
        Some(h) => h.mode(),
        None => quantile_sorted(sorted, 0.5),
    }
}

pub fn build_null(n: usize, filter: &FilterSpec, trials: usize, seed: Seed) -> Result<NullDistribution> {
    if n < MIN_EPOCH_LEN {
        return Err(Error::param(
            "n",
            format!("epoch length must be at least {MIN_EPOCH_LEN}, got {n}"),
        ));
    }
    if trials < MIN_TRIALS {
        return Err(Error::InsufficientTrials {
            got: trials,
            min: MIN_TRIALS,
        });
    }
    let mut cves = parallel::try_map_trials(trials, |i| {
        let epoch = gaussian_noise(n, 0.0, 1.0, seed.derive(i))?;
        Ok(cve_of_signal(&epoch, Some(filter), false)?.cve)
    })?;
    cves.sort_by(f64::total_cmp);

    let mean = stats::mean(&cves);
    let std = stats::sample_std(&cves);
    let mode = histogram_mode(&cves);
    let dist = NullDistribution {
        n,
        filter: *filter,
        trials,
        storage: SampleStorage::Full,
        cve_samples: cves,
        mode,
        mean,
        std,
        seed,
        metadata: EstimatorMetadata::current(),
    };
    Ok(if trials > FULL_SAMPLE_LIMIT {
        dist.compressed(GRID_POINTS)
    } else {
        dist
    })
}

/// [`build_null`] on a dedicated pool of `workers` threads.
pub fn build_null_with_workers(
    n: usize,
    filter: &FilterSpec,
    trials: usize,
    seed: Seed,
    workers: usize,
) -> Result<NullDistribution> {
    parallel::with_workers(workers, || build_null(n, filter, trials, seed))?
}

pub fn interval(dist: &NullDistribution, alpha: f64) -> Result<ConfidenceInterval> {
    ConfidenceInterval::from_sorted(&dist.cve_samples, alpha)
}

impl NullDistribution {
    /// Replace the retained values by a `points`-point quantile grid.
    /// Summary statistics are kept from the full sample.
    pub fn compressed(&self, points: usize) -> NullDistribution {
        let points = points.max(2);
        let grid = (0..points)
            .map(|i| quantile_sorted(&self.cve_samples, i as f64 / (points - 1) as f64))
            .collect();
        NullDistribution {
            storage: SampleStorage::QuantileGrid,
            cve_samples: grid,
            metadata: self.metadata.clone(),
            ..*self
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        quantile_sorted(&self.cve_samples, p)
    }

    pub fn histogram(&self) -> Option<Histogram> {
        match self.storage {
            SampleStorage::Full => Histogram::freedman_diaconis(&self.cve_samples),
            SampleStorage::QuantileGrid => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::InsufficientTrials {
                got: self.trials,
                min: MIN_TRIALS,
            });
        }
        if self.cve_samples.is_empty() {
            return Err(Error::CorruptTable("no CVE values".into()));
        }
        if self.cve_samples.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::CorruptTable("CVE values must be finite and positive".into()));
        }
        if self.cve_samples.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::CorruptTable("CVE values are not sorted".into()));
        }
        if self.storage == SampleStorage::Full && self.cve_samples.len() != self.trials {
            return Err(Error::CorruptTable(format!(
                "expected {} samples, found {}",
                self.trials,
                self.cve_samples.len()
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Table file format
// ---------------------------------------------------------------------------

/// Writes `dist` in the versioned text format (see README for the layout).
pub fn write_table<W: Write>(dist: &NullDistribution, mut out: W) -> std::io::Result<()> {
    let m = &dist.metadata;
    writeln!(out, "{TABLE_MAGIC}")?;
    writeln!(out, "schema_version: {SCHEMA_VERSION}")?;
    writeln!(out, "n: {}", dist.n)?;
    writeln!(out, "low_cut: {}", dist.filter.low_cut())?;
    writeln!(out, "high_cut: {}", dist.filter.high_cut())?;
    writeln!(out, "trials: {}", dist.trials)?;
    writeln!(out, "seed: {}", dist.seed.value())?;
    writeln!(out, "rng_name: {}", m.rng_name)?;
    writeln!(out, "gaussian_sampler: {}", m.gaussian_sampler)?;
    writeln!(out, "hilbert_method: {}", m.hilbert_method)?;
    writeln!(out, "std_divisor: {}", m.std_divisor)?;
    writeln!(out, "mode: {}", dist.mode)?;
    writeln!(out, "mean: {}", dist.mean)?;
    writeln!(out, "std: {}", dist.std)?;
    writeln!(out, "storage: {}", dist.storage.as_str())?;
    writeln!(out, "count: {}", dist.cve_samples.len())?;
    writeln!(out, "values:")?;
    for v in &dist.cve_samples {
        writeln!(out, "{v}")?;
    }
    out.flush()
}

pub fn save_table(dist: &NullDistribution, path: impl AsRef<Path>) -> Result<()> {
    let file = fs::File::create(path)?;
    write_table(dist, BufWriter::new(file))?;
    Ok(())
}

pub fn load_table(path: impl AsRef<Path>) -> Result<NullDistribution> {
    let file = fs::File::open(path)?;
    read_table(BufReader::new(file))
}

pub fn read_table<R: BufRead>(input: R) -> Result<NullDistribution> {
    let mut lines = input.lines();
    let mut next = || -> Result<Option<String>> { lines.next().transpose().map_err(Error::from) };

    match next()? {
        Some(l) if l.trim() == TABLE_MAGIC => {}
        _ => return Err(Error::CorruptTable(format!("missing `{TABLE_MAGIC}` header"))),
    }

    let mut header: Vec<(String, String)> = Vec::new();
    loop {
        let line = next()?.ok_or_else(|| Error::CorruptTable("unexpected end of header".into()))?;
        let line = line.trim();
        if line == "values:" {
            break;
        }
        let (k, v) = line
            .split_once(':')
            .ok_or_else(|| Error::CorruptTable(format!("malformed header line `{line}`")))?;
        header.push((k.trim().to_string(), v.trim().to_string()));
    }
    let field = |key: &str| header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let required = |key: &str| field(key).ok_or_else(|| Error::CorruptTable(format!("missing field `{key}`")));
    fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
        v.parse()
            .map_err(|_| Error::CorruptTable(format!("field `{key}` has unparseable value `{v}`")))
    }

    let version: u32 = parse("schema_version", required("schema_version")?)?;
    if version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: version,
            expected: SCHEMA_VERSION,
        });
    }

    let meta_field = |key: &str| {
        field(key)
            .map(str::to_string)
            .ok_or_else(|| Error::IncompatibleTable(format!("missing estimator metadata field `{key}`")))
    };
    let metadata = EstimatorMetadata {
        rng_name: meta_field("rng_name")?,
        gaussian_sampler: meta_field("gaussian_sampler")?,
        hilbert_method: meta_field("hilbert_method")?,
        std_divisor: meta_field("std_divisor")?,
    };

    let filter = FilterSpec::new(
        parse("low_cut", required("low_cut")?)?,
        parse("high_cut", required("high_cut")?)?,
    )
    .map_err(|e| Error::CorruptTable(e.to_string()))?;
    let storage = match required("storage")? {
        "samples" => SampleStorage::Full,
        "quantile-grid" => SampleStorage::QuantileGrid,
        other => return Err(Error::CorruptTable(format!("unknown storage `{other}`"))),
    };
    let count: usize = parse("count", required("count")?)?;

    let mut values = Vec::with_capacity(count);
    while let Some(line) = next()? {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        values.push(parse::<f64>("values", line)?);
    }
    if values.len() != count {
        return Err(Error::CorruptTable(format!(
            "header announces {count} values, found {}",
            values.len()
        )));
    }

    let dist = NullDistribution {
        n: parse("n", required("n")?)?,
        filter,
        trials: parse("trials", required("trials")?)?,
        storage,
        cve_samples: values,
        mode: parse("mode", required("mode")?)?,
        mean: parse("mean", required("mean")?)?,
        std: parse("std", required("std")?)?,
        seed: Seed(parse("seed", required("seed")?)?),
        metadata,
    };
    dist.validate()?;
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::motokawa_m;

    fn small_table(n: usize, trials: usize, seed: u64) -> NullDistribution {
        build_null(n, &FilterSpec::FULL_BAND, trials, Seed(seed)).unwrap()
    }

    #[test]
    fn quantile_rule_by_hand() {
        let ci = ConfidenceInterval::from_sorted(&[1.0, 2.0, 3.0, 4.0], 0.5).unwrap();
        assert!((ci.lower - 1.75).abs() < 1e-15);
        assert!((ci.upper - 3.25).abs() < 1e-15);
    }

    #[test]
    fn interval_collapses_toward_median() {
        let v: Vec<f64> = (1..=101).map(|i| i as f64).collect();
        let wide = ConfidenceInterval::from_sorted(&v, 0.1).unwrap();
        let narrow = ConfidenceInterval::from_sorted(&v, 0.999_999).unwrap();
        assert!(narrow.upper - narrow.lower < 1e-3);
        assert!((narrow.lower - 51.0).abs() < 1e-3);
        assert!(wide.upper - wide.lower > 80.0);
    }

    #[test]
    fn alpha_validation() {
        for a in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(ConfidenceInterval::from_sorted(&[1.0, 2.0], a).is_err());
        }
    }

    #[test]
    fn build_null_validation() {
        assert!(matches!(
            build_null(64, &FilterSpec::FULL_BAND, 999, Seed(0)),
            Err(Error::InsufficientTrials { got: 999, min: 1000 })
        ));
        assert!(build_null(8, &FilterSpec::FULL_BAND, 1000, Seed(0)).is_err());
    }

    #[test]
    fn table_is_sorted_positive_and_plausible() {
        let t = small_table(256, 5000, 1);
        assert_eq!(t.cve_samples.len(), 5000);
        assert!(t.cve_samples.windows(2).all(|w| w[0] <= w[1]));
        assert!(t.cve_samples.iter().all(|&x| x > 0.0 && x.is_finite()));
        assert!((0.1..=1.0).contains(&t.mode));
        assert!((t.mean - motokawa_m()).abs() < 0.01);
        let ci = interval(&t, 0.01).unwrap();
        assert!(ci.contains(motokawa_m()));
    }

    #[test]
    fn worker_count_does_not_change_table() {
        let f = FilterSpec::new(0.0, 0.25).unwrap();
        let one = build_null_with_workers(128, &f, 2000, Seed(5), 1).unwrap();
        let four = build_null_with_workers(128, &f, 2000, Seed(5), 4).unwrap();
        let eight = build_null_with_workers(128, &f, 2000, Seed(5), 8).unwrap();
        assert_eq!(one, four);
        assert_eq!(one, eight);
    }

    #[test]
    fn more_points_tighten_the_distribution() {
        let stds: Vec<f64> = [256, 1024, 4096].iter().map(|&n| small_table(n, 3000, 2).std).collect();
        assert!(stds[0] > stds[1] && stds[1] > stds[2], "{stds:?}");
    }

    #[test]
    fn histogram_mode_and_maxima() {
        let h = Histogram {
            start: 0.0,
            width: 1.0,
            counts: vec![1, 3, 3, 7, 7, 2, 0],
        };
        assert_eq!(h.local_maxima(), 1);
        assert_eq!(h.mode(), 3.5);
        let bimodal = Histogram {
            start: 0.0,
            width: 1.0,
            counts: vec![1, 5, 2, 6, 1],
        };
        assert_eq!(bimodal.local_maxima(), 2);
        assert_eq!(bimodal.significant_maxima(0.0), 2);
        assert_eq!(bimodal.significant_maxima(4.0), 1);
        let clear = Histogram {
            start: 0.0,
            width: 1.0,
            counts: vec![10, 900, 20, 30, 800, 5],
        };
        assert_eq!(clear.significant_maxima(4.0), 2);
        let noisy_tail = Histogram {
            start: 0.0,
            width: 1.0,
            counts: vec![0, 1, 0, 40, 200, 500, 480, 490, 300, 50, 0, 1],
        };
        assert_eq!(noisy_tail.local_maxima(), 4);
        assert_eq!(noisy_tail.significant_maxima(4.0), 1);
        assert!(Histogram::freedman_diaconis(&[1.0, 1.0, 1.0]).is_none());
        assert_eq!(histogram_mode(&[2.0, 2.0]), 2.0);
    }

    #[test]
    fn save_load_round_trip() {
        let t = small_table(64, 1000, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.txt");
        save_table(&t, &path).unwrap();
        assert_eq!(load_table(&path).unwrap(), t);
    }

    #[test]
    fn grid_round_trip_and_accuracy() {
        let t = small_table(128, 10_000, 4);
        let g = t.compressed(GRID_POINTS);
        assert_eq!(g.cve_samples.len(), GRID_POINTS);
        let full = interval(&t, 0.05).unwrap();
        let approx = interval(&g, 0.05).unwrap();
        assert!((full.lower - approx.lower).abs() < 0.002);
        assert!((full.upper - approx.upper).abs() < 0.002);

        let mut buf = Vec::new();
        write_table(&g, &mut buf).unwrap();
        assert_eq!(read_table(&buf[..]).unwrap(), g);
    }

    #[test]
    fn large_tables_are_compressed() {
        let t = build_null(16, &FilterSpec::FULL_BAND, FULL_SAMPLE_LIMIT + 1, Seed(6)).unwrap();
        assert_eq!(t.storage, SampleStorage::QuantileGrid);
        assert_eq!(t.cve_samples.len(), GRID_POINTS);
        assert_eq!(t.trials, FULL_SAMPLE_LIMIT + 1);
    }

    fn serialized(t: &NullDistribution) -> String {
        let mut buf = Vec::new();
        write_table(t, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn missing_metadata_is_incompatible() {
        let text = serialized(&small_table(32, 1000, 7));
        let stripped: String = text
            .lines()
            .filter(|l| !l.starts_with("hilbert_method"))
            .map(|l| format!("{l}\n"))
            .collect();
        let err = read_table(stripped.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::IncompatibleTable(_)));
        assert!(err.to_string().starts_with("incompatible table"));
    }

    #[test]
    fn schema_version_mismatch_names_both() {
        let text = serialized(&small_table(32, 1000, 8)).replace("schema_version: 1", "schema_version: 7");
        let err = read_table(text.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::SchemaVersion { found: 7, expected: 1 }));
        assert!(msg.contains('7') && msg.contains('1'));
    }

    #[test]
    fn corrupted_tables_are_rejected() {
        let text = serialized(&small_table(32, 1000, 9));
        let truncated: String = text.lines().take(400).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_table(truncated.as_bytes()), Err(Error::CorruptTable(_))));
        let garbled = text.replacen("\n0.", "\nzz", 1);
        assert!(matches!(read_table(garbled.as_bytes()), Err(Error::CorruptTable(_))));
        assert!(matches!(read_table("hello\n".as_bytes()), Err(Error::CorruptTable(_))));
    }
}
