//! `envcv` command-line front end.
//!
//! Exit codes: `0` GaussianConsistent, `10` SubGaussianRhythmic, `11`
//! SuperGaussianPulsating (only `analyze` classifies; other commands exit 0
//! on success). Errors follow sysexits: `64` usage, `65` data mismatch,
//! `66` unreadable input, `70` internal, `73` cannot create output.

pub mod io;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use envcv_core::analysis::{self, write_reports_csv, Experiment};
use envcv_core::calibration::{self, NullDistribution};
use envcv_core::generators::{self, PulseKind, PulseShape};
use envcv_core::stats::{cve_of_signal, sample_std};
use envcv_core::{
    build_null, build_null_with_workers, classify, ftpr, load_table, save_table, AmRegime, ClassificationResult,
    FilterSpec, Seed, Signal,
};

pub use io::{Format, InputSpec};
pub use report::Report;

pub const EXIT_GAUSSIAN: i32 = 0;
pub const EXIT_SUB_GAUSSIAN: i32 = 10;
pub const EXIT_SUPER_GAUSSIAN: i32 = 11;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_CANT_CREATE: i32 = 73;

pub const GENERATORS: [&str; 4] = ["gaussian", "sinusoid", "poisson", "two-tone"];

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    NoInput(String),
    Software(String),
    CantCreate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::NoInput(_) => EXIT_NO_INPUT,
            CliError::Software(_) => EXIT_SOFTWARE,
            CliError::CantCreate(_) => EXIT_CANT_CREATE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m)
            | CliError::Data(m)
            | CliError::NoInput(m)
            | CliError::Software(m)
            | CliError::CantCreate(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

fn usage(e: envcv_core::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn data(e: envcv_core::Error) -> CliError {
    CliError::Data(e.to_string())
}

pub fn exit_code_for(label: AmRegime) -> i32 {
    match label {
        AmRegime::GaussianConsistent => EXIT_GAUSSIAN,
        AmRegime::SubGaussianRhythmic => EXIT_SUB_GAUSSIAN,
        AmRegime::SuperGaussianPulsating => EXIT_SUPER_GAUSSIAN,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "envcv",
    version,
    about = "Gaussianity testing and AM classification with the envelope CV (CVE)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify one epoch against a calibration table.
    Analyze(AnalyzeArgs),
    /// Build a Monte Carlo null table for (n, passband).
    Calibrate(CalibrateArgs),
    /// Write phase-randomized (FTPR) surrogates of an epoch.
    Surrogate(SurrogateArgs),
    /// Generate a synthetic signal.
    Simulate(SimulateArgs),
    /// Run an estimator-quality experiment (variance, bias, sensitivity).
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input signal file.
    #[arg(long)]
    pub input: PathBuf,
    /// Input format; inferred from the extension when omitted (.f64/.raw/.bin are raw).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Zero-based CSV column.
    #[arg(long, default_value_t = 0)]
    pub column: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sample_rate: f64,
}

impl InputArgs {
    pub fn spec(&self) -> InputSpec {
        InputSpec {
            path: self.input.clone(),
            format: self.format.unwrap_or_else(|| Format::from_path(&self.input)),
            column: self.column,
            sample_rate_hz: self.sample_rate,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Calibration table written by `calibrate`.
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Passband lower edge (cycles/sample); must match the table.
    #[arg(long)]
    pub low_cut: Option<f64>,
    /// Passband upper edge (cycles/sample); must match the table.
    #[arg(long)]
    pub high_cut: Option<f64>,
    /// Subtract the sample mean before the envelope.
    #[arg(long)]
    pub demean: bool,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Epoch length in samples.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub low_cut: f64,
    #[arg(long, default_value_t = 0.5)]
    pub high_cut: f64,
    #[arg(long, default_value_t = calibration::DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to all cores; output does not depend on it).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SurrogateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Subtract the mean before randomizing (otherwise DC is preserved).
    #[arg(long)]
    pub demean: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// One of: gaussian, sinusoid, poisson, two-tone.
    pub generator: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Output format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// gaussian: mean.
    #[arg(long, default_value_t = 0.0)]
    pub mean: f64,
    /// gaussian: standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// sinusoid, two-tone: frequency in cycles/sample, (0, 0.5).
    #[arg(long, default_value_t = 0.05)]
    pub freq: f64,
    /// sinusoid: tone power over unit noise variance, dB.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub snr_db: f64,
    /// poisson: pulse onsets per sample.
    #[arg(long, default_value_t = 0.01)]
    pub rate: f64,
    /// poisson: `exp` or `gauss`.
    #[arg(long, default_value = "exp")]
    pub pulse: String,
    /// poisson: exponential decay constant in samples.
    #[arg(long, default_value_t = 8.0)]
    pub tau: f64,
    /// poisson: Gaussian bump width in samples.
    #[arg(long, default_value_t = 4.0)]
    pub width: f64,
    /// poisson: pulse amplitude.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub amplitude: f64,
    /// two-tone: sine amplitude.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a_sin: f64,
    /// two-tone: cosine amplitude.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a_cos: f64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// One of: variance, bias, sensitivity.
    pub experiment: String,
    /// Comma-separated sample sizes (variance, bias).
    #[arg(long)]
    pub sizes: Option<String>,
    /// Comma-separated outlier magnitudes (sensitivity).
    #[arg(long, allow_hyphen_values = true)]
    pub magnitudes: Option<String>,
    #[arg(long, default_value_t = analysis::MIN_EXPERIMENT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    let outcome = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Surrogate(a) => cmd_surrogate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bench(a) => cmd_bench(a, stdout),
    };
    match outcome {
        Ok((report, code)) => {
            if let Some(r) = report {
                if !r.is_finite() {
                    let _ = writeln!(stderr, "envcv: internal error: non-finite value in report");
                    return EXIT_SOFTWARE;
                }
                if let Err(e) = r.write_to(&mut *stdout) {
                    let _ = writeln!(stderr, "envcv: cannot write report: {e}");
                    return EXIT_SOFTWARE;
                }
            }
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "envcv: {e}");
            e.exit_code()
        }
    }
}

type Outcome = Result<(Option<Report>, i32), CliError>;

fn read_table(path: &Path) -> Result<NullDistribution, CliError> {
    load_table(path).map_err(|e| match e {
        envcv_core::Error::Io(io) => CliError::NoInput(format!("cannot read table {}: {io}", path.display())),
        other => CliError::Data(format!("{}: {other}", path.display())),
    })
}

fn resolve_filter(table: &NullDistribution, low: Option<f64>, high: Option<f64>) -> Result<FilterSpec, CliError> {
    if low.is_none() && high.is_none() {
        return Ok(table.filter);
    }
    let requested = FilterSpec::new(
        low.unwrap_or(table.filter.low_cut()),
        high.unwrap_or(table.filter.high_cut()),
    )
    .map_err(usage)?;
    if requested != table.filter {
        return Err(CliError::Data(format!(
            "table/pipeline mismatch: requested passband [{}, {}] but table was built for [{}, {}]",
            requested.low_cut(),
            requested.high_cut(),
            table.filter.low_cut(),
            table.filter.high_cut()
        )));
    }
    Ok(requested)
}

/// Classification plus the report fields `analyze` prints for it.
pub fn analyze_signal(
    signal: &Signal,
    table: &NullDistribution,
    alpha: f64,
    demean: bool,
) -> Result<(ClassificationResult, Report), CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Usage(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let result = classify(signal, table, alpha, demean).map_err(data)?;
    let stats = cve_of_signal(signal, Some(&table.filter), demean).map_err(data)?;
    let mut r = Report::new("analyze");
    r.num("input.samples", signal.len() as f64)
        .num("input.sample_rate_hz", signal.sample_rate_hz())
        .text("pipeline.demean", demean)
        .num("pipeline.low_cut", table.filter.low_cut())
        .num("pipeline.high_cut", table.filter.high_cut())
        .text("pipeline.hilbert_method", &table.metadata.hilbert_method)
        .text("pipeline.std_divisor", &table.metadata.std_divisor)
        .num("stats.n", stats.n as f64)
        .num("stats.mean", stats.mean)
        .num("stats.std", stats.std)
        .num("stats.cve", stats.cve)
        .num("table.n", table.n as f64)
        .num("table.trials", table.trials as f64)
        .text("table.seed", table.seed.value())
        .num("table.mode", table.mode)
        .num("classification.alpha", alpha)
        .num("classification.lower", result.interval.lower)
        .num("classification.upper", result.interval.upper)
        .text("classification.label", result.label);
    Ok((result, r))
}

fn cmd_analyze(a: &AnalyzeArgs) -> Outcome {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(CliError::Usage(format!("alpha must lie in (0, 1), got {}", a.alpha)));
    }
    let spec = a.input.spec();
    let table = read_table(&a.table)?;
    resolve_filter(&table, a.low_cut, a.high_cut)?;
    let signal = spec.read()?;
    let (result, body) = analyze_signal(&signal, &table, a.alpha, a.demean)?;
    let mut r = Report::new("analyze");
    r.text("input.path", spec.path.display())
        .text("input.format", spec.format.as_str())
        .text("table.path", a.table.display());
    for (k, v) in body.fields().iter().skip(1) {
        r.text(k, v);
    }
    Ok((Some(r), exit_code_for(result.label)))
}

fn cmd_calibrate(a: &CalibrateArgs) -> Outcome {
    let filter = FilterSpec::new(a.low_cut, a.high_cut).map_err(usage)?;
    let dist = match a.workers {
        Some(w) => build_null_with_workers(a.n, &filter, a.trials, Seed(a.seed), w),
        None => build_null(a.n, &filter, a.trials, Seed(a.seed)),
    }
    .map_err(|e| match e {
        envcv_core::Error::WorkerPool(_) => CliError::Software(e.to_string()),
        other => usage(other),
    })?;
    save_table(&dist, &a.out).map_err(|e| CliError::CantCreate(format!("{}: {e}", a.out.display())))?;
    let ci = calibration::interval(&dist, 0.05).map_err(data)?;
    let mut r = Report::new("calibrate");
    r.text("table.path", a.out.display())
        .text("table.schema_version", calibration::SCHEMA_VERSION)
        .num("table.n", dist.n as f64)
        .num("table.low_cut", filter.low_cut())
        .num("table.high_cut", filter.high_cut())
        .num("table.trials", dist.trials as f64)
        .text("table.seed", a.seed)
        .text("table.storage", dist.storage.as_str())
        .num("summary.mode", dist.mode)
        .num("summary.mean", dist.mean)
        .num("summary.std", dist.std)
        .num("summary.interval95.lower", ci.lower)
        .num("summary.interval95.upper", ci.upper);
    Ok((Some(r), 0))
}

fn median_of(sorted: &[f64]) -> f64 {
    calibration::quantile_sorted(sorted, 0.5)
}

fn cmd_surrogate(a: &SurrogateArgs) -> Outcome {
    if a.count == 0 {
        return Err(CliError::Usage("count must be at least 1".into()));
    }
    let spec = a.input.spec();
    let mut signal = spec.read()?;
    if a.demean {
        signal = signal.demeaned();
    }
    let original = cve_of_signal(&signal, None, false).map_err(data)?;
    let batch = ftpr(&signal, a.count, Seed(a.seed)).map_err(data)?;

    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::CantCreate(format!("{}: {e}", a.out_dir.display())))?;
    let mut cves = Vec::with_capacity(a.count);
    for (i, s) in batch.surrogates.iter().enumerate() {
        let path = a.out_dir.join(format!("surrogate_{i:04}.{}", spec.format.extension()));
        io::write_signal(&path, spec.format, s.samples())
            .map_err(|e| CliError::CantCreate(format!("{}: {e}", path.display())))?;
        cves.push(cve_of_signal(s, None, false).map_err(data)?.cve);
    }
    cves.sort_by(f64::total_cmp);

    let mut r = Report::new("surrogate");
    r.text("input.path", spec.path.display())
        .text("input.format", spec.format.as_str())
        .num("input.samples", signal.len() as f64)
        .text("pipeline.demean", a.demean)
        .text("surrogate.seed", a.seed)
        .num("surrogate.count", a.count as f64)
        .text("surrogate.out_dir", a.out_dir.display())
        .num("original.cve", original.cve)
        .num("surrogates.cve_min", cves[0])
        .num("surrogates.cve_median", median_of(&cves))
        .num("surrogates.cve_max", cves[cves.len() - 1]);
    Ok((Some(r), 0))
}

fn cmd_simulate(a: &SimulateArgs) -> Outcome {
    let seed = Seed(a.seed);
    let mut params = Report::new("simulate");
    params
        .text("generator", &a.generator)
        .num("n", a.n as f64)
        .text("seed", a.seed);
    let signal = match a.generator.as_str() {
        "gaussian" => {
            params.num("mean", a.mean).num("sigma", a.sigma);
            generators::gaussian_noise(a.n, a.mean, a.sigma, seed)
        }
        "sinusoid" => {
            params.num("freq", a.freq).num("snr_db", a.snr_db);
            generators::noisy_sinusoid(a.n, a.freq, a.snr_db, seed)
        }
        "poisson" => {
            let kind = match a.pulse.as_str() {
                "exp" => PulseKind::ExponentialDecay { tau: a.tau },
                "gauss" => PulseKind::GaussianBump { width: a.width },
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown pulse `{other}`; expected exp or gauss"
                    )))
                }
            };
            let shape = PulseShape::new(kind, a.amplitude).map_err(usage)?;
            params
                .num("rate", a.rate)
                .text("pulse", &a.pulse)
                .num("amplitude", a.amplitude);
            match kind {
                PulseKind::ExponentialDecay { tau } => params.num("tau", tau),
                PulseKind::GaussianBump { width } => params.num("width", width),
            };
            generators::filtered_poisson(a.n, a.rate, &shape, seed)
        }
        "two-tone" => {
            params.num("freq", a.freq).num("a_sin", a.a_sin).num("a_cos", a.a_cos);
            generators::two_tone(a.n, a.freq, a.a_sin, a.a_cos)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown generator `{other}`; valid generators: {}",
                GENERATORS.join(", ")
            )))
        }
    }
    .map_err(usage)?;

    let format = a.format.unwrap_or_else(|| Format::from_path(&a.out));
    io::write_signal(&a.out, format, signal.samples())
        .map_err(|e| CliError::CantCreate(format!("{}: {e}", a.out.display())))?;
    params
        .text("output.path", a.out.display())
        .text("output.format", format.as_str())
        .num("output.std", sample_std(signal.samples()));
    let sidecar = sidecar_path(&a.out);
    fs::write(&sidecar, params.render()).map_err(|e| CliError::CantCreate(format!("{}: {e}", sidecar.display())))?;
    Ok((Some(params), 0))
}

/// `<out>.meta` next to a simulated signal.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

fn parse_grid<T>(name: &str, raw: Option<&str>, default: &[T]) -> Result<Vec<T>, CliError>
where
    T: std::str::FromStr + Clone,
{
    let Some(raw) = raw else {
        return Ok(default.to_vec());
    };
    let values = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| CliError::Usage(format!("--{name}: `{s}` is not a valid value")))
        })
        .collect::<Result<Vec<T>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Usage(format!("--{name}: empty grid")));
    }
    Ok(values)
}

pub const DEFAULT_SIZES: [usize; 4] = [32, 128, 512, 2048];
pub const DEFAULT_MAGNITUDES: [f64; 6] = [0.0, 1.0, 2.0, 3.0, 5.0, 10.0];

fn cmd_bench(a: &BenchArgs, stdout: &mut dyn Write) -> Outcome {
    let experiment: Experiment = a.experiment.parse().map_err(|_| {
        CliError::Usage(format!(
            "unknown experiment `{}`; valid experiments: {}",
            a.experiment,
            Experiment::NAMES.join(", ")
        ))
    })?;
    let seed = Seed(a.seed);
    let reports = match experiment {
        Experiment::Variance | Experiment::Bias => {
            let sizes = parse_grid("sizes", a.sizes.as_deref(), &DEFAULT_SIZES)?;
            if experiment == Experiment::Variance {
                analysis::estimator_variance_experiment(&sizes, a.trials, seed)
            } else {
                analysis::estimator_bias_experiment(&sizes, a.trials, seed)
            }
        }
        Experiment::Sensitivity => {
            let mags = parse_grid("magnitudes", a.magnitudes.as_deref(), &DEFAULT_MAGNITUDES)?;
            analysis::sensitivity_experiment(&mags, a.trials, seed)
        }
    }
    .map_err(usage)?;

    match &a.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| CliError::CantCreate(format!("{}: {e}", path.display())))?;
            write_reports_csv(experiment, &reports, std::io::BufWriter::new(file))
                .map_err(|e| CliError::CantCreate(format!("{}: {e}", path.display())))?;
            let mut r = Report::new("bench");
            r.text("experiment", experiment.as_str())
                .num("trials", a.trials as f64)
                .text("seed", a.seed)
                .text("output.path", path.display());
            Ok((Some(r), 0))
        }
        None => {
            write_reports_csv(experiment, &reports, stdout).map_err(|e| CliError::Software(e.to_string()))?;
            Ok((None, 0))
        }
    }
}
