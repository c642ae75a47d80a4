//! The `brown` command-line tool: Brown measure profiles, push-forward laws,
//! random matrix simulations and their comparison, as CSV/JSON files.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a numerical
//! procedure or a post-run sanity check fails. Errors are reported on stderr
//! as a single JSON object `{"error": ..., "kind": ...}`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use brown_core::additive::uniform_grid;
use brown_core::{export, AdditiveBrown, MultiplicativeBrown, SpectralMeasure};
use brown_rmt::{compare_marginal, EmpiricalSpectrum, Marginal, Model, ProfileRef, SpectrumMeta};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "BROWN_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const MASS_TOL: f64 = 1e-6;
const BOUND_SLACK: f64 = 1e-9;
const HAAR_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "brown",
    version,
    about = "Brown measures of free Brownian motions with initial conditions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// x₀ + c_t, x₀ self-adjoint with an atomic law
    Additive {
        #[command(subcommand)]
        what: AdditiveCommand,
    },
    /// u·b_t, u unitary with an atomic or Haar law
    Mult {
        #[command(subcommand)]
        what: MultCommand,
    },
    /// Sample eigenvalues of the finite-N matrix model
    Simulate {
        #[command(subcommand)]
        what: SimulateCommand,
    },
    /// Compare a simulated spectrum with the computed Brown measure
    Compare(CompareArgs),
    /// Closed-form cross-checks
    Check {
        #[command(subcommand)]
        what: CheckCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum AdditiveCommand {
    /// Profile a, v_t(a), w_t(a), ψ_t(a) and the support intervals
    Density(AdditiveArgs),
    /// Density of μ ⊞ σ_t at ψ_t(a)
    Law(AdditiveArgs),
}

#[derive(Debug, Subcommand)]
pub enum MultCommand {
    /// Profile θ, r_t(θ), φ(θ), w_t(θ), a_t(θ) and the arcs of U_t
    Density(MultArgs),
    /// Density of the law of u·u_t at e^{iφ(θ)}
    Law(MultArgs),
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Eigenvalues of X_N + Z_N(t)
    Additive(SimulateArgs),
    /// Eigenvalues of U_N·G_N(t)
    Mult(SimulateMultArgs),
}

#[derive(Debug, Subcommand)]
pub enum CheckCommand {
    /// Radial CDF of the annulus law against the S-transform formula
    Haar(HaarArgs),
}

/// `lo:hi:n`, an evenly spaced grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("expected lo:hi:n, got {s:?}"));
        };
        let lo: f64 = lo.parse().map_err(|_| format!("bad lower bound {lo:?}"))?;
        let hi: f64 = hi.parse().map_err(|_| format!("bad upper bound {hi:?}"))?;
        let n: usize = n.parse().map_err(|_| format!("bad point count {n:?}"))?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(format!("need finite lo < hi, got {lo}:{hi}"));
        }
        if n < 16 {
            return Err(format!("need at least 16 grid points, got {n}"));
        }
        Ok(GridSpec { lo, hi, n })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AdditiveArgs {
    /// Measure file (real-atomic)
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    /// lo:hi:n; defaults to ±(max|x_j| + 2√t) with 801 points
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<GridSpec>,
    /// Output CSV; sidecars are written next to it
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct MultArgs {
    /// Measure file (circle-atomic or haar)
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value_t = 1441)]
    pub n_theta: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    /// Matrix size
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Eigenvalue CSV; `<stem>.meta.json` is written next to it
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateMultArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: SimulateArgs,
    /// Number of geometric Euler steps
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Eigenvalue CSV from `simulate`
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Metadata sidecar; defaults to `<stem>.meta.json`
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Overrides the measure recorded in the metadata
    #[arg(long)]
    pub measure: Option<PathBuf>,
    /// real-part (additive), argument or radius (multiplicative)
    #[arg(long)]
    pub marginal: String,
    /// Profile grid lo:hi:n for additive spectra
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<GridSpec>,
    /// Profile angles for multiplicative spectra
    #[arg(long, default_value_t = 1441)]
    pub n_theta: usize,
    /// Report JSON; printed to stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct HaarArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    /// Report JSON; printed to stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] brown_core::Error),
    #[error(transparent)]
    Rmt(#[from] brown_rmt::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            EXIT_NUMERICAL
        } else {
            EXIT_INVALID
        }
    }

    fn is_numerical(&self) -> bool {
        match self {
            CliError::Core(e) => e.is_numerical(),
            CliError::Rmt(e) => e.is_numerical(),
            CliError::CheckFailed(_) => true,
            _ => false,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            report_error(&e.to_string(), "validation");
            return EXIT_INVALID;
        }
    };
    match with_thread_pool(|| execute(&cli)) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            let kind = if e.is_numerical() {
                "numerical"
            } else {
                "validation"
            };
            report_error(&e.to_string(), kind);
            e.exit_code()
        }
    }
}

fn report_error(message: &str, kind: &str) {
    let body = serde_json::json!({ "error": message.trim(), "kind": kind });
    eprintln!("{body}");
}

fn with_thread_pool<F>(f: F) -> CliResult<String>
where
    F: FnOnce() -> CliResult<String> + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    pool.install(f)
}

fn execute(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Additive { what } => match what {
            AdditiveCommand::Density(a) => additive(a, false),
            AdditiveCommand::Law(a) => additive(a, true),
        },
        Command::Mult { what } => match what {
            MultCommand::Density(a) => mult(a, false),
            MultCommand::Law(a) => mult(a, true),
        },
        Command::Simulate { what } => match what {
            SimulateCommand::Additive(a) => simulate(a, None),
            SimulateCommand::Mult(a) => simulate(&a.common, Some(a.steps)),
        },
        Command::Compare(a) => compare(a),
        Command::Check { what } => match what {
            CheckCommand::Haar(a) => check_haar(a),
        },
    }
}

/// `<dir>/<stem>.<suffix>` for an output `<dir>/<stem>.<ext>`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file<F>(path: &Path, body: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> CliResult<()>,
{
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    body(&mut out)?;
    out.flush().map_err(io_err(path))
}

fn read_measure(path: &Path) -> CliResult<SpectralMeasure> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(SpectralMeasure::from_json_str(&text)?)
}

#[derive(Serialize)]
struct Versions {
    brown: &'static str,
    #[serde(rename = "brown-core")]
    core: &'static str,
    #[serde(rename = "brown-rmt")]
    rmt: &'static str,
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    config: &'a C,
    seed: Option<u64>,
    versions: Versions,
    outputs: Vec<String>,
}

/// Writes `<stem>.manifest.json` next to `primary`. No timestamps, so
/// repeated runs give identical manifests.
fn write_manifest<C: Serialize>(
    primary: &Path,
    command: &str,
    config: &C,
    seed: Option<u64>,
    outputs: &[&Path],
) -> CliResult<()> {
    let manifest = Manifest {
        command,
        config,
        seed,
        versions: Versions {
            brown: env!("CARGO_PKG_VERSION"),
            core: brown_core::VERSION,
            rmt: brown_rmt::VERSION,
        },
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = sidecar(primary, "manifest.json");
    write_file(&path, |out| {
        serde_json::to_writer_pretty(&mut *out, &manifest).map_err(brown_core::Error::from)?;
        writeln!(out).map_err(io_err(primary))
    })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

/// Fails with exit code 3 after the outputs were written, if a check did.
fn finish(summary: String, checks_ok: bool) -> CliResult<String> {
    if checks_ok {
        Ok(summary)
    } else {
        Err(CliError::CheckFailed(summary))
    }
}

fn additive_grid(model: &AdditiveBrown, spec: Option<GridSpec>) -> Vec<f64> {
    match spec {
        Some(g) => uniform_grid(g.lo, g.hi, g.n),
        None => model.default_grid(),
    }
}

fn additive(args: &AdditiveArgs, law: bool) -> CliResult<String> {
    let model = AdditiveBrown::new(read_measure(&args.measure)?, args.t)?;
    let profile = model.profile(&additive_grid(&model, args.grid))?;
    let intervals = sidecar(&args.out, "intervals.json");
    write_file(&args.out, |out| {
        if law {
            export::write_additive_law(out, &profile)?;
        } else {
            export::write_additive_profile(out, &profile)?;
        }
        Ok(())
    })?;
    write_file(&intervals, |out| {
        Ok(export::write_intervals_json(out, &profile)?)
    })?;
    let command = if law {
        "additive law"
    } else {
        "additive density"
    };
    write_manifest(&args.out, command, args, None, &[&args.out, &intervals])?;

    let mass = profile.total_mass()?;
    let mass_ok = (mass - 1.0).abs() <= MASS_TOL;
    let t = args.t;
    if law {
        let rows = profile.law_rows().len();
        let summary = format!(
            "{command}: {rows} points, law mass {mass:.10} ({})",
            verdict(mass_ok)
        );
        return finish(summary, mass_ok);
    }
    let max_w = profile.max_density();
    let bound = 2.0 / (std::f64::consts::PI * t);
    let bound_ok = max_w <= bound + BOUND_SLACK;
    let summary = format!(
        "{command}: {} points, {} interval(s), mass {mass:.10} ({}), max w {max_w:.6e} <= 2/(pi t) = {bound:.6e} ({})",
        profile.rows.len(),
        profile.support_intervals.len(),
        verdict(mass_ok),
        verdict(bound_ok)
    );
    finish(summary, mass_ok && bound_ok)
}

fn mult(args: &MultArgs, law: bool) -> CliResult<String> {
    let model = MultiplicativeBrown::new(read_measure(&args.measure)?, args.t)?;
    let profile = model.profile(args.n_theta)?;
    let arcs = sidecar(&args.out, "arcs.json");
    write_file(&args.out, |out| {
        if law {
            export::write_multiplicative_law(out, &profile)?;
        } else {
            export::write_multiplicative_profile(out, &profile)?;
        }
        Ok(())
    })?;
    write_file(&arcs, |out| Ok(export::write_arcs_json(out, &profile)?))?;
    let command = if law { "mult law" } else { "mult density" };
    write_manifest(&args.out, command, args, None, &[&args.out, &arcs])?;

    if law {
        let mass = model.law_mass()?;
        let ok = (mass - 1.0).abs() <= MASS_TOL;
        let summary = format!(
            "{command}: {} points, law mass {mass:.10} ({})",
            profile.law_rows().len(),
            verdict(ok)
        );
        return finish(summary, ok);
    }
    let mass = profile.total_mass()?;
    let mass_ok = (mass - 1.0).abs() <= MASS_TOL;
    let max_w = profile.max_density();
    let bound = 1.0 / (std::f64::consts::PI * args.t);
    let bound_ok = max_w <= bound + BOUND_SLACK;
    let summary = format!(
        "{command}: {} angles, {} arc(s), mass {mass:.10} ({}), max w {max_w:.6e} <= 1/(pi t) = {bound:.6e} ({})",
        profile.rows.len(),
        profile.arcs().len(),
        verdict(mass_ok),
        verdict(bound_ok)
    );
    finish(summary, mass_ok && bound_ok)
}

fn simulate(args: &SimulateArgs, steps: Option<usize>) -> CliResult<String> {
    let mu = read_measure(&args.measure)?;
    let spectrum = match steps {
        None => brown_rmt::sample_additive(&mu, args.n, args.t, args.seed)?,
        Some(k) => brown_rmt::sample_multiplicative(&mu, args.n, args.t, k, args.seed)?,
    };
    let meta = sidecar(&args.out, "meta.json");
    write_file(&args.out, |out| Ok(spectrum.write_csv(out)?))?;
    write_file(&meta, |out| Ok(spectrum.write_meta(out)?))?;
    let command = match steps {
        None => "simulate additive",
        Some(_) => "simulate mult",
    };
    #[derive(Serialize)]
    struct Config<'a> {
        #[serde(flatten)]
        args: &'a SimulateArgs,
        steps: Option<usize>,
    }
    write_manifest(
        &args.out,
        command,
        &Config { args, steps },
        Some(args.seed),
        &[&args.out, &meta],
    )?;
    let mean = spectrum.mean();
    Ok(format!(
        "{command}: {} eigenvalues, mean {:.6e}{:+.6e}i, max |λ| {:.6e}",
        spectrum.eigenvalues.len(),
        mean.re,
        mean.im,
        spectrum
            .eigenvalues
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    ))
}

fn compare(args: &CompareArgs) -> CliResult<String> {
    let marginal: Marginal = args.marginal.parse()?;
    let meta_path = args
        .meta
        .clone()
        .unwrap_or_else(|| sidecar(&args.spectrum, "meta.json"));
    let meta_file = File::open(&meta_path).map_err(io_err(&meta_path))?;
    let meta: SpectrumMeta =
        serde_json::from_reader(BufReader::new(meta_file)).map_err(brown_core::Error::from)?;
    let csv = File::open(&args.spectrum).map_err(io_err(&args.spectrum))?;
    let spectrum = EmpiricalSpectrum::read(BufReader::new(csv), meta)?;
    let mu = match &args.measure {
        Some(p) => read_measure(p)?,
        None => spectrum.measure()?,
    };
    let report = match spectrum.model() {
        Model::Additive => {
            let model = AdditiveBrown::new(mu, spectrum.t())?;
            let profile = model.profile(&additive_grid(&model, args.grid))?;
            compare_marginal(&spectrum, ProfileRef::Additive(&profile), marginal)?
        }
        Model::Multiplicative => {
            let profile = MultiplicativeBrown::new(mu, spectrum.t())?.profile(args.n_theta)?;
            compare_marginal(&spectrum, ProfileRef::Multiplicative(&profile), marginal)?
        }
    };
    let json = serde_json::to_string_pretty(&report).map_err(brown_core::Error::from)?;
    match &args.out {
        Some(path) => {
            write_file(path, |out| writeln!(out, "{json}").map_err(io_err(path)))?;
            write_manifest(path, "compare", args, Some(spectrum.meta.seed), &[path])?;
        }
        None => println!("{json}"),
    }
    Ok(format!(
        "compare: {} {} marginal, n = {}, t = {}, distance {:.6} over {} points",
        report.model, report.marginal, report.n, report.t, report.distance, report.bins
    ))
}

fn check_haar(args: &HaarArgs) -> CliResult<String> {
    let report = brown_core::haar_annulus_check(args.t)?;
    let json = serde_json::to_string_pretty(&report).map_err(brown_core::Error::from)?;
    match &args.out {
        Some(path) => {
            write_file(path, |out| writeln!(out, "{json}").map_err(io_err(path)))?;
            write_manifest(path, "check haar", args, None, &[path])?;
        }
        None => println!("{json}"),
    }
    let ok = report.max_discrepancy <= HAAR_TOL;
    let summary = format!(
        "check haar: t = {}, annulus [{:.12}, {:.12}], max CDF discrepancy {:.3e} <= {HAAR_TOL:e} ({})",
        args.t,
        report.inner_radius,
        report.outer_radius,
        report.max_discrepancy,
        verdict(ok)
    );
    finish(summary, ok)
}
