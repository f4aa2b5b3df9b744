//! Command-line front end.
//!
//! Every subcommand writes its table to standard output, or to `--out`
//! together with a `<out>.manifest.json` run manifest. Exit status is 0 on
//! success, 2 for usage or configuration errors and 1 for anything else.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::dense::{pauli_matrix, CMatrix};
use crate::error::{Error, Result};
use crate::experiments::{
    gradient_histogram, layer_sweep, train_baseline, train_staged, variance_sweep, write_csv, write_json,
    OutputFormat, Structure, SweepConfig, TrainConfig, DEFAULT_PENDING, DEFAULT_SAMPLES,
};
use crate::haar::{
    default_generator, haar_moment1_check, haar_moment2_check, mc_grad_variance, variance_exact, GradStructure,
    MomentReport,
};
use crate::haar::design_cardinality_bound;
use crate::lcu::LcuCoefficients;
use crate::rng::rng_from_seed;
use crate::statevector::PauliString;

#[derive(Debug, Parser)]
#[command(name = "plateau", version, about = "Gradient-variance experiments on random parameterized circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
struct Common {
    /// Master seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (standard output when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads (defaults to all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum StructureArg {
    Design2,
    Lcu,
    Proposed,
}

impl From<StructureArg> for Structure {
    fn from(s: StructureArg) -> Self {
        match s {
            StructureArg::Design2 => Structure::Design2,
            StructureArg::Lcu => Structure::Lcu,
            StructureArg::Proposed => Structure::Proposed,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Suite {
    Moments,
    VarianceFormulas,
}

#[derive(Debug, Clone, Args, Serialize)]
struct SweepArgs {
    #[arg(long, value_enum)]
    structure: StructureArg,
    /// Qubit counts, `min..max` inclusive or a single value
    #[arg(long, value_parser = parse_grid)]
    qubits: Grid,
    /// Layer counts, `min..max` inclusive or a single value
    #[arg(long, value_parser = parse_grid)]
    layers: Grid,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Combined leading layers for the proposed structure
    #[arg(long, default_value_t = DEFAULT_PENDING)]
    pending: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
struct HistArgs {
    #[arg(long, value_enum)]
    structure: StructureArg,
    #[arg(long)]
    qubits: usize,
    #[arg(long)]
    layers: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_PENDING)]
    pending: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
struct TrainArgs {
    #[arg(long)]
    qubits: usize,
    #[arg(long)]
    layers: usize,
    #[arg(long, allow_hyphen_values = true)]
    target: f64,
    #[arg(long, default_value_t = 1)]
    pending: usize,
    #[arg(long, default_value_t = 10)]
    epochs_per_stage: usize,
    /// Train the plain circuit for the same epoch budget instead
    #[arg(long)]
    baseline: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
struct HaarArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = Suite::Moments)]
    suite: Suite,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
struct BoundArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    t: u32,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Variance of d theta_{1,1} across qubit counts
    VarianceSweep(SweepArgs),
    /// Variance of d theta_{1,1} across layer counts
    LayerSweep(SweepArgs),
    /// Raw d theta_{1,1} samples at one (n, L)
    GradHist(HistArgs),
    /// Staged (or baseline) training towards a target expectation
    Train(TrainArgs),
    /// Monte-Carlo checks of Haar moment and variance formulas
    HaarVerify(HaarArgs),
    /// Lower bound on the size of a unitary t-design
    DesignBound(BoundArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VarianceSweep(_) => "variance-sweep",
            Command::LayerSweep(_) => "layer-sweep",
            Command::GradHist(_) => "grad-hist",
            Command::Train(_) => "train",
            Command::HaarVerify(_) => "haar-verify",
            Command::DesignBound(_) => "design-bound",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::VarianceSweep(a) | Command::LayerSweep(a) => &a.common,
            Command::GradHist(a) => &a.common,
            Command::Train(a) => &a.common,
            Command::HaarVerify(a) => &a.common,
            Command::DesignBound(a) => &a.common,
        }
    }

    fn config(&self) -> Result<serde_json::Value> {
        Ok(match self {
            Command::VarianceSweep(a) | Command::LayerSweep(a) => serde_json::to_value(a)?,
            Command::GradHist(a) => serde_json::to_value(a)?,
            Command::Train(a) => serde_json::to_value(a)?,
            Command::HaarVerify(a) => serde_json::to_value(a)?,
            Command::DesignBound(a) => serde_json::to_value(a)?,
        })
    }
}

/// An inclusive `min..max` grid or a single value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
struct Grid(Vec<usize>);

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    parse_range(s).map(Grid)
}

/// Parses `min..max` (inclusive) or a single value.
fn parse_range(s: &str) -> std::result::Result<Vec<usize>, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    match s.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi) = (parse(lo)?, parse(hi.trim_start_matches('='))?);
            if lo > hi {
                return Err(format!("empty range {s}"));
            }
            Ok((lo..=hi).collect())
        }
        None => Ok(vec![parse(s)?]),
    }
}

/// Provenance written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
}

/// One labelled Monte-Carlo check.
#[derive(Debug, Serialize)]
struct CheckRow {
    check: String,
    #[serde(flatten)]
    report: MomentReport,
    sigmas: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<f64>,
}

impl CheckRow {
    fn new(check: impl Into<String>, report: MomentReport, exact: Option<f64>) -> Self {
        Self {
            check: check.into(),
            report,
            sigmas: report.sigmas(),
            exact,
        }
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidConfig(_)
            | Error::DimensionMismatch { .. }
            | Error::TooManyQubits(_)
            | Error::DimensionTooLarge(_)
            | Error::ParamOutOfRange { .. }
            | Error::UnsupportedPartition(_)
            | Error::MalformedPartition(_)
    )
}

/// Runs the CLI with process standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI against the given output streams; returns the exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command, &argv, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if is_config_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

fn execute(command: &Command, argv: &[OsString], out: &mut dyn Write) -> Result<()> {
    let common = command.common();
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(k) = common.threads {
            if k == 0 {
                return Err(Error::InvalidConfig("--threads must be at least 1".into()));
            }
            builder = builder.num_threads(k);
        }
        builder.build().map_err(|e| Error::InvalidConfig(e.to_string()))?
    };
    let start = Instant::now();
    let mut buf = Vec::new();
    let summary = pool.install(|| produce(command, &mut buf))?;

    match &common.out {
        Some(path) => {
            write_file(path, &buf)?;
            let manifest = RunManifest {
                subcommand: command.name().to_string(),
                argv: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
                config: command.config()?,
                seed: common.seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                outputs: vec![path.display().to_string()],
                duration_seconds: start.elapsed().as_secs_f64(),
                summary,
            };
            let manifest_path = manifest_path(path);
            let text = serde_json::to_string_pretty(&manifest)?;
            write_file(&manifest_path, format!("{text}\n").as_bytes())?;
        }
        None => out.write_all(&buf)?,
    }
    Ok(())
}

/// `<out>.manifest.json`
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(bytes)?;
    w.flush()?;
    Ok(())
}

fn emit<T: Serialize>(format: Format, rows: &[T], out: &mut Vec<u8>) -> Result<()> {
    match OutputFormat::from(format) {
        OutputFormat::Csv => write_csv(out, rows),
        OutputFormat::Json => write_json(out, rows),
    }
}

/// Produces the output bytes and an optional summary for the manifest.
fn produce(command: &Command, out: &mut Vec<u8>) -> Result<Option<serde_json::Value>> {
    match command {
        Command::VarianceSweep(a) | Command::LayerSweep(a) => {
            let config = SweepConfig {
                structure: a.structure.into(),
                qubits: a.qubits.0.clone(),
                layers: a.layers.0.clone(),
                samples: a.samples,
                pending: a.pending,
                seed: a.common.seed,
            };
            let records = if matches!(command, Command::LayerSweep(_)) {
                layer_sweep(&config)?
            } else {
                variance_sweep(&config)?
            };
            emit(a.common.format, &records, out)?;
            Ok(None)
        }
        Command::GradHist(a) => {
            let hist = gradient_histogram(a.structure.into(), a.qubits, a.layers, a.samples, a.pending, a.common.seed)?;
            emit(a.common.format, &hist.rows(), out)?;
            Ok(Some(serde_json::json!({ "mean": hist.mean, "variance": hist.variance })))
        }
        Command::Train(a) => {
            let obs = PauliString::z1z2(a.qubits)?;
            let config = TrainConfig::new(a.qubits, a.layers, a.target, a.pending, a.epochs_per_stage, a.common.seed);
            config.validate()?;
            let trace = if a.baseline {
                train_baseline(a.qubits, a.layers, a.target, config.total_epochs(), &obs, a.common.seed)?
            } else {
                train_staged(&config, &obs)?
            };
            emit(a.common.format, &trace.rows(0), out)?;
            Ok(Some(serde_json::json!({
                "epochs": trace.epochs(),
                "final_expectation": trace.final_expectation,
                "final_cost": trace.final_cost,
                "final_fixed_layers": trace.final_fixed_layers,
            })))
        }
        Command::HaarVerify(a) => {
            let rows = match a.suite {
                Suite::Moments => moment_suite(a.dim, a.samples, a.common.seed)?,
                Suite::VarianceFormulas => variance_suite(a.dim, a.samples, a.common.seed)?,
            };
            match a.common.format {
                Format::Json => {
                    for row in &rows {
                        out.extend_from_slice(serde_json::to_string(row)?.as_bytes());
                        out.push(b'\n');
                    }
                }
                Format::Csv => {
                    let flat: Vec<_> = rows
                        .iter()
                        .map(|r| {
                            (
                                r.check.clone(),
                                r.report.estimate,
                                r.report.closed_form,
                                r.report.samples,
                                r.report.standard_error,
                                r.sigmas,
                            )
                        })
                        .collect();
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["check", "estimate", "closed_form", "samples", "standard_error", "sigmas"])
                        .map_err(|e| Error::Io(e.to_string()))?;
                    for row in flat {
                        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
                    }
                    w.flush()?;
                }
            }
            Ok(None)
        }
        Command::DesignBound(a) => {
            let bound = design_cardinality_bound(a.dim, a.t)?;
            writeln!(out, "{bound}")?;
            Ok(None)
        }
    }
}

fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

fn pure_zero(n: usize) -> CMatrix {
    let mut rho = CMatrix::zeros(n, n);
    rho[(0, 0)] = Complex64::new(1.0, 0.0);
    rho
}

fn moment_suite(n: usize, samples: usize, seed: u64) -> Result<Vec<CheckRow>> {
    let mut rng = rng_from_seed(seed);
    let id = CMatrix::identity(n, n);
    let a = random_hermitian(n, &mut rng);
    let b = random_hermitian(n, &mut rng);
    let c = random_hermitian(n, &mut rng);
    let d = random_hermitian(n, &mut rng);
    let rho = pure_zero(n);
    Ok(vec![
        CheckRow::new("haar1_identity", haar_moment1_check(n, &id, &id, samples, &mut rng)?, None),
        CheckRow::new("haar1_random", haar_moment1_check(n, &a, &b, samples, &mut rng)?, None),
        CheckRow::new("haar2_identity", haar_moment2_check(n, [&id, &id, &id, &id], samples, &mut rng)?, None),
        CheckRow::new("haar2_pure", haar_moment2_check(n, [&a, &rho, &a, &rho], samples, &mut rng)?, None),
        CheckRow::new("haar2_random", haar_moment2_check(n, [&a, &b, &c, &d], samples, &mut rng)?, None),
    ])
}

fn variance_suite(n: usize, samples: usize, seed: u64) -> Result<Vec<CheckRow>> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::InvalidConfig(format!(
            "variance formulas use Z1 Z2 and need a power-of-two dimension >= 4, got {n}"
        )));
    }
    let obs = pauli_matrix(&PauliString::z1z2(n.trailing_zeros() as usize)?);
    let v = default_generator(n)?;
    let mut rng = rng_from_seed(seed);
    GradStructure::ALL
        .into_iter()
        .map(|s| {
            let report = mc_grad_variance(s, &obs, samples, &mut rng)?;
            let exact = variance_exact(s, &obs, &v, LcuCoefficients::default());
            Ok(CheckRow::new(s.name(), report, Some(exact)))
        })
        .collect()
}
