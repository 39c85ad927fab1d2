//! The `fpou` command line.
//!
//! Every flag can also come from a JSON file given with `--config`; the file
//! uses the flag names in snake case and flags win over the file.
//! Exit codes: 0 success, 1 invalid input, 2 I/O or resource problem,
//! 3 an asserted verification check failed.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cache::load_or_build;
use crate::error::{invalid, Error, Result};
use crate::estimators::{estimate_with, EstimateResult};
use crate::kernel::{validate_hurst, validate_lambda, QuadMeta, TableSpec, DEFAULT_MAX_N};
use crate::model::{compute_ts, simulate_ou, ObservationPath};
use crate::montecarlo::{
    emit_histograms, emit_rates, emit_summary, emit_table, run_cell, run_grid, run_rates,
    ExperimentConfig, TableLayout, TableStore,
};
use crate::noise::{sample_eta, stream_seed, LambdaMode, NoiseSpec};
use crate::verify::{
    error_decomposition, run_bound_suite, run_distribution_suite, run_identity_suite, run_martingale_suite,
    MartingaleOptions, VerifyReport,
};

pub const CACHE_ENV: &str = "FPOU_CACHE_DIR";
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fpou", version, about = "Fractional Poisson driven OU model: tables, simulation, estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the coefficient table and store it in the cache directory.
    Coeffs(Settings),
    /// Simulate one observation path and write it as CSV or JSON.
    Simulate(Settings),
    /// Estimate θ from a path CSV (`index,t,x[,eta]`).
    Estimate(Settings),
    /// Monte Carlo summary for one parameter cell.
    Mc(Settings),
    /// Grid of the nine reference (θ, H) cells at each m.
    Tables(Settings),
    /// Normalized estimation errors for histograms.
    Hist(Settings),
    /// Empirical variance against the theoretical rate along m.
    Rates(Settings),
    /// Run invariant suites; exit code 3 when an asserted check fails.
    Verify(Settings),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FbmMode {
    /// λ = n ln 2, so κ = 1/2
    Symmetric,
    /// λ = m ln 2
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identity,
    Bounds,
    Distribution,
    Martingale,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Both,
    Mle,
}

/// Every knob, optional so that file values and defaults can fill gaps.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// JSON file with default values for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Grid denominator (step 1/m).
    #[arg(long)]
    pub m: Option<u64>,
    /// Sample-size exponent, n = round(m^α).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Hurst index in (0.501, 1).
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Drift parameter.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Poisson intensity (default 1).
    #[arg(long, conflicts_with = "fbm_mode")]
    pub lambda: Option<f64>,
    /// Choose λ so the walk approximates the fractional Brownian case.
    #[arg(long, value_enum)]
    pub fbm_mode: Option<FbmMode>,
    /// Replications.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run manifest path; defaults to `<out>.manifest.json` when `--out` is set.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (0 = all cores). Never changes outputs.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Coefficient cache directory (default from FPOU_CACHE_DIR).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub quad_inner: Option<u32>,
    #[arg(long)]
    pub quad_outer: Option<u32>,
    /// Largest n for which a dense table may be built.
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Path CSV for `estimate`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Grid values of θ (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub thetas: Option<Vec<f64>>,
    /// Grid values of H (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub hursts: Option<Vec<f64>>,
    /// Grid values of m (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub ms: Option<Vec<u64>>,
    /// Estimators reported by `tables`.
    #[arg(long, value_enum)]
    pub layout: Option<Layout>,
    /// Suite for `verify`.
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
}

impl Settings {
    /// Fill unset fields from `other`.
    fn or(self, other: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: self.$f.or(other.$f)),* } };
        }
        pick!(
            config, m, alpha, hurst, theta, lambda, fbm_mode, reps, seed, out, manifest, format, threads,
            cache_dir, quad_inner, quad_outer, max_n, input, thetas, hursts, ms, layout, suite
        )
    }

    fn with_file(self) -> Result<Settings> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path)?;
        let file: Settings = serde_json::from_str(&text)
            .map_err(|e| invalid(format!("config file {}: {e}", path.display())))?;
        if file.lambda.is_some() && file.fbm_mode.is_some() {
            return Err(invalid("config file sets both lambda and fbm_mode"));
        }
        // a λ flag overrides a file fbm_mode and the other way round
        let mut file = file;
        if self.lambda.is_some() {
            file.fbm_mode = None;
        }
        if self.fbm_mode.is_some() {
            file.lambda = None;
        }
        Ok(self.or(file))
    }

    fn quad(&self) -> QuadMeta {
        let d = QuadMeta::default();
        QuadMeta {
            inner_order: self.quad_inner.unwrap_or(d.inner_order),
            outer_order: self.quad_outer.unwrap_or(d.outer_order),
        }
    }

    fn lambda_mode(&self) -> LambdaMode {
        match (self.lambda, self.fbm_mode) {
            (Some(l), _) => LambdaMode::Explicit(l),
            (None, Some(FbmMode::Symmetric)) => LambdaMode::FbmSymmetric,
            (None, Some(FbmMode::Literal)) => LambdaMode::FbmLiteral,
            (None, None) => LambdaMode::default(),
        }
    }

    /// Experiment config with defaults for anything unset.
    fn experiment(&self, defaults: ExperimentConfig) -> Result<ExperimentConfig> {
        let c = ExperimentConfig {
            m: self.m.unwrap_or(defaults.m),
            alpha: self.alpha.unwrap_or(defaults.alpha),
            hurst: self.hurst.unwrap_or(defaults.hurst),
            theta: self.theta.unwrap_or(defaults.theta),
            lambda_mode: if self.lambda.is_some() || self.fbm_mode.is_some() {
                self.lambda_mode()
            } else {
                defaults.lambda_mode
            },
            reps: self.reps.unwrap_or(defaults.reps),
            master_seed: self.seed.unwrap_or(defaults.master_seed),
            quad: self.quad(),
        };
        c.table_spec()?;
        Ok(c)
    }

    fn cache_dir(&self) -> Option<PathBuf> {
        self.cache_dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
    }

    fn store(&self) -> TableStore {
        TableStore::with_max_n(self.cache_dir(), self.max_n.unwrap_or(DEFAULT_MAX_N))
    }

    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

/// Record of one invocation, written next to the data output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub status: String,
    pub settings: Settings,
    pub configs: Vec<ExperimentConfig>,
    pub master_seed: Option<u64>,
    pub table_checksums: Vec<String>,
    pub outputs: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub started_unix: f64,
    pub finished_unix: f64,
}

fn now_unix() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// What a command produced, collected for the manifest.
#[derive(Default)]
struct Outcome {
    configs: Vec<ExperimentConfig>,
    checksums: Vec<u64>,
    outputs: Vec<PathBuf>,
    warnings: Vec<String>,
    verify_failed: bool,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_)
        | Error::DegeneratePath(_)
        | Error::CorruptedInput(_)
        | Error::SingularMatrix(_) => EXIT_INVALID,
        Error::Io(_) | Error::ResourceLimit(_) | Error::Format { .. } | Error::NumericFailure { .. } => EXIT_IO,
    }
}

/// Parse arguments, run the command and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (name, settings) = match cli.command {
        Command::Coeffs(s) => ("coeffs", s),
        Command::Simulate(s) => ("simulate", s),
        Command::Estimate(s) => ("estimate", s),
        Command::Mc(s) => ("mc", s),
        Command::Tables(s) => ("tables", s),
        Command::Hist(s) => ("hist", s),
        Command::Rates(s) => ("rates", s),
        Command::Verify(s) => ("verify", s),
    };
    let started = now_unix();
    let settings = match settings.with_file() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let result = with_threads(settings.threads, || dispatch(name, &settings));
    let (code, status, outcome) = match result {
        Ok(o) if o.verify_failed => (EXIT_VERIFY, "verify-failed".to_string(), o),
        Ok(o) => (0, "ok".to_string(), o),
        Err(e) => {
            eprintln!("error: {e}");
            (exit_code(&e), format!("error: {e}"), Outcome::default())
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let manifest_path = settings
        .manifest
        .clone()
        .or_else(|| settings.out.as_ref().map(|o| manifest_for(o)));
    if let Some(path) = manifest_path {
        let m = RunManifest {
            command: name.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            status,
            master_seed: settings.seed,
            settings: settings.clone(),
            configs: outcome.configs,
            table_checksums: outcome.checksums.iter().map(|c| format!("{c:016x}")).collect(),
            outputs: outcome.outputs,
            warnings: outcome.warnings,
            started_unix: started,
            finished_unix: now_unix(),
        };
        let written = serde_json::to_string_pretty(&m)
            .map_err(|e| Error::Io(std::io::Error::other(e)))
            .and_then(|text| fs::write(&path, text + "\n").map_err(Error::from));
        if let Err(e) = written {
            eprintln!("error: cannot write manifest {}: {e}", path.display());
            return if code == 0 { EXIT_IO } else { code };
        }
    }
    code
}

fn manifest_for(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    match threads {
        None => f(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::ResourceLimit(format!("thread pool: {e}")))?
            .install(f),
    }
}

fn dispatch(name: &str, s: &Settings) -> Result<Outcome> {
    match name {
        "coeffs" => cmd_coeffs(s),
        "simulate" => cmd_simulate(s),
        "estimate" => cmd_estimate(s),
        "mc" => cmd_mc(s),
        "tables" => cmd_tables(s),
        "hist" => cmd_hist(s),
        "rates" => cmd_rates(s),
        "verify" => cmd_verify(s),
        other => Err(invalid(format!("unknown command {other}"))),
    }
}

/// Write `text` to `--out` or stdout.
fn emit(s: &Settings, text: &str, outcome: &mut Outcome) -> Result<()> {
    match &s.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, text)?;
            outcome.outputs.push(path.clone());
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|t| t + "\n")
        .map_err(|e| Error::Io(std::io::Error::other(e)))
}

fn cmd_coeffs(s: &Settings) -> Result<Outcome> {
    let c = s.experiment(ExperimentConfig::default())?;
    let spec = c.table_spec()?;
    let dir = s.cache_dir().unwrap_or_else(|| PathBuf::from(".fpou-cache"));
    let built = load_or_build(&spec, Some(&dir), s.max_n.unwrap_or(DEFAULT_MAX_N))?;
    let path = built.path.clone().expect("cache path");
    println!(
        "{} n={} checksum={:016x} {}",
        path.display(),
        spec.n,
        built.checksum,
        if built.reused { "reused" } else { "built" }
    );
    Ok(Outcome {
        configs: vec![c],
        checksums: vec![built.checksum],
        outputs: vec![path],
        ..Default::default()
    })
}

#[derive(Serialize)]
struct PathJson<'a> {
    m: u64,
    n: usize,
    theta: f64,
    lambda: f64,
    kappa: f64,
    seed: u64,
    x: &'a [f64],
    eta: &'a [f64],
}

fn cmd_simulate(s: &Settings) -> Result<Outcome> {
    let c = s.experiment(ExperimentConfig { reps: 1, ..Default::default() })?;
    let mut store = s.store();
    let table = store.get(&c.table_spec()?)?;
    let seed = stream_seed(c.master_seed, 0);
    let eta = sample_eta(NoiseSpec::for_table(&table), seed);
    let x = simulate_ou(&table, c.theta, eta.values())?;
    let text = match s.format(Format::Csv) {
        Format::Csv => path_csv(x.values(), Some(eta.values()), c.m)?,
        Format::Json => to_json(&PathJson {
            m: c.m,
            n: table.n(),
            theta: c.theta,
            lambda: table.lambda(),
            kappa: table.kappa(),
            seed: c.master_seed,
            x: x.values(),
            eta: eta.values(),
        })?,
    };
    let mut o = Outcome {
        configs: vec![c],
        checksums: vec![table.checksum()],
        ..Default::default()
    };
    emit(s, &text, &mut o)?;
    Ok(o)
}

/// Path CSV with header `index,t,x[,eta]`; `eta` has no value at index 0.
pub fn path_csv(x: &[f64], eta: Option<&[f64]>, m: u64) -> Result<String> {
    use crate::montecarlo::csv_err;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index", "t", "x"];
    if eta.is_some() {
        header.push("eta");
    }
    w.write_record(&header).map_err(csv_err)?;
    for (k, v) in x.iter().enumerate() {
        let mut rec = vec![k.to_string(), (k as f64 / m as f64).to_string(), v.to_string()];
        if let Some(e) = eta {
            rec.push(if k == 0 { String::new() } else { e[k - 1].to_string() });
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

/// Observations and optional noise read back from a path CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub x: Vec<f64>,
    pub eta: Option<Vec<f64>>,
}

pub fn read_path_csv(path: &Path, m: u64) -> Result<PathRecord> {
    let mut r = csv::Reader::from_path(path).map_err(crate::montecarlo::csv_err)?;
    let headers = r.headers().map_err(crate::montecarlo::csv_err)?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (Some(ci), Some(ct), Some(cx)) = (col("index"), col("t"), col("x")) else {
        return Err(Error::CorruptedInput(
            "path CSV needs the header index,t,x[,eta]".into(),
        ));
    };
    let ce = col("eta");
    let mut x = Vec::new();
    let mut eta = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(crate::montecarlo::csv_err)?;
        let field = |c: usize, what: &str| -> Result<f64> {
            rec.get(c)
                .map(str::trim)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|_| Error::CorruptedInput(format!("row {}: bad {what}", row + 1)))
        };
        let idx = field(ci, "index")?;
        if idx != row as f64 {
            return Err(Error::CorruptedInput(format!(
                "row {}: index {idx} out of sequence",
                row + 1
            )));
        }
        let t = field(ct, "t")?;
        let want = row as f64 / m as f64;
        if (t - want).abs() > 1e-9 * want.max(1.0) {
            return Err(Error::CorruptedInput(format!(
                "row {}: t = {t} but index/m = {want}",
                row + 1
            )));
        }
        x.push(field(cx, "x")?);
        if let Some(c) = ce {
            if row > 0 {
                eta.push(field(c, "eta")?);
            }
        }
    }
    Ok(PathRecord {
        x,
        eta: ce.map(|_| eta),
    })
}

#[derive(Serialize)]
struct EstimateOutput {
    estimate: EstimateResult,
    conditional_variance: f64,
    lambda: f64,
    hurst: f64,
    shifted_by: Option<f64>,
    /// Present when the input has a noise column and θ is given.
    identity: Option<VerifyReport>,
}

fn cmd_estimate(s: &Settings) -> Result<Outcome> {
    let input = s
        .input
        .as_ref()
        .ok_or_else(|| invalid("estimate needs --input <path.csv>"))?;
    let m = s.m.ok_or_else(|| invalid("estimate needs --m"))?;
    if m < 2 {
        return Err(invalid(format!("grid denominator m must be >= 2, got {m}")));
    }
    let hurst = s.hurst.unwrap_or(0.75);
    validate_hurst(hurst)?;
    let rec = read_path_csv(input, m)?;
    let x = ObservationPath::ingest(rec.x, m)?;
    let n = x.n();
    let lambda = s.lambda_mode().resolve(m, n);
    validate_lambda(lambda)?;
    let spec = TableSpec {
        m,
        n,
        hurst,
        lambda,
        quad: s.quad(),
    };
    let mut store = s.store();
    let table = store.get(&spec)?;
    let ts = compute_ts(&table, &x)?;
    let est = estimate_with(&x, &table, &ts)?;
    let mut warnings = Vec::new();
    let shifted_by = match x.provenance() {
        crate::model::Provenance::Ingested { shifted_by } if shifted_by != 0.0 => {
            warnings.push(format!("first observation {shifted_by} subtracted so that X_0 = 0"));
            Some(shifted_by)
        }
        _ => None,
    };
    let identity = match (&rec.eta, s.theta) {
        (Some(eta), Some(theta)) if eta.len() == n => {
            let mut rep = VerifyReport::new("identity");
            let back = crate::model::reconstruct_noise(&table, &x, theta)?;
            let err = back.iter().zip(eta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            rep.at_most("noise_reconstruction", err, crate::verify::IDENTITY_TOL, "noise recovered from observations");
            let (d_ls, d_ml) = error_decomposition(&table, &x, &ts, eta, est.a_star);
            let scale = |d: f64| d.abs().max(theta.abs()).max(1e-3);
            rep.at_most(
                "lse_error_decomposition",
                (est.theta_ls - theta - d_ls).abs() / scale(d_ls),
                crate::verify::DECOMPOSITION_TOL,
                "least squares error as weighted noise sum",
            );
            rep.at_most(
                "mle_error_decomposition",
                (est.theta_ml - theta - d_ml).abs() / scale(d_ml),
                crate::verify::DECOMPOSITION_TOL,
                "likelihood error as weighted shifted noise sum",
            );
            Some(rep)
        }
        (Some(eta), _) if eta.len() != n => {
            return Err(Error::CorruptedInput(format!(
                "eta column has {} values, expected {n}",
                eta.len()
            )))
        }
        _ => None,
    };
    let out = EstimateOutput {
        conditional_variance: crate::estimators::conditional_variance_formula(&est)?,
        estimate: est,
        lambda,
        hurst,
        shifted_by,
        identity,
    };
    let mut o = Outcome {
        checksums: vec![table.checksum()],
        warnings,
        ..Default::default()
    };
    emit(s, &to_json(&out)?, &mut o)?;
    Ok(o)
}

fn cmd_mc(s: &Settings) -> Result<Outcome> {
    let c = s.experiment(ExperimentConfig::default())?;
    let mut store = s.store();
    let summary = run_cell(&c, &mut store)?;
    let text = match s.format(Format::Csv) {
        Format::Csv => emit_summary(&summary)?,
        Format::Json => to_json(&summary)?,
    };
    let mut o = Outcome {
        configs: vec![c],
        checksums: vec![summary.table_checksum],
        warnings: summary.warnings.clone(),
        ..Default::default()
    };
    emit(s, &text, &mut o)?;
    Ok(o)
}

fn grid_configs(s: &Settings, default_ms: &[u64]) -> Result<Vec<ExperimentConfig>> {
    let base = s.experiment(ExperimentConfig::default())?;
    let ms = s.ms.clone().unwrap_or_else(|| match s.m {
        Some(m) => vec![m],
        None => default_ms.to_vec(),
    });
    let hursts = s.hursts.clone().unwrap_or_else(|| match s.hurst {
        Some(h) => vec![h],
        None => vec![0.55, 0.75, 0.90],
    });
    let thetas = s.thetas.clone().unwrap_or_else(|| match s.theta {
        Some(t) => vec![t],
        None => vec![0.1, 0.5, 0.9],
    });
    let mut out = Vec::new();
    for &m in &ms {
        for &hurst in &hursts {
            for &theta in &thetas {
                out.push(ExperimentConfig { m, hurst, theta, ..base });
            }
        }
    }
    Ok(out)
}

fn cmd_tables(s: &Settings) -> Result<Outcome> {
    let configs = grid_configs(s, &[10])?;
    let mut store = s.store();
    let grid = run_grid(&configs, &mut store);
    let layout = match s.layout {
        Some(Layout::Mle) => TableLayout::MleOnly,
        Some(Layout::Both) => TableLayout::Both,
        None if s.fbm_mode.is_some() => TableLayout::MleOnly,
        None => TableLayout::Both,
    };
    let mut o = Outcome {
        configs,
        ..Default::default()
    };
    for cell in &grid {
        match &cell.outcome {
            Ok(sum) => {
                o.checksums.push(sum.table_checksum);
                o.warnings.extend(sum.warnings.iter().cloned());
            }
            Err(msg) => o.warnings.push(format!("cell failed: {msg}")),
        }
    }
    o.checksums.dedup();
    let text = match s.format(Format::Csv) {
        Format::Csv => emit_table(&grid, layout)?,
        Format::Json => {
            let cells: Vec<serde_json::Value> = grid
                .iter()
                .map(|c| match &c.outcome {
                    Ok(sum) => serde_json::json!({ "status": "ok", "summary": sum }),
                    Err(msg) => serde_json::json!({ "status": format!("error: {msg}"), "config": c.config }),
                })
                .collect();
            to_json(&cells)?
        }
    };
    emit(s, &text, &mut o)?;
    Ok(o)
}

fn cmd_hist(s: &Settings) -> Result<Outcome> {
    let base = s.experiment(ExperimentConfig {
        m: 20,
        reps: 500,
        ..Default::default()
    })?;
    let hursts = s.hursts.clone().unwrap_or_else(|| match s.hurst {
        Some(h) => vec![h],
        None => vec![0.55, 0.75, 0.90],
    });
    let mut store = s.store();
    let mut o = Outcome::default();
    let mut summaries = Vec::new();
    for hurst in hursts {
        let c = ExperimentConfig { hurst, ..base };
        c.table_spec()?;
        let sum = run_cell(&c, &mut store)?;
        o.configs.push(c);
        o.checksums.push(sum.table_checksum);
        summaries.push(sum);
    }
    let text = emit_histograms(&summaries)?;
    emit(s, &text, &mut o)?;
    Ok(o)
}

fn cmd_rates(s: &Settings) -> Result<Outcome> {
    let base = s.experiment(ExperimentConfig {
        reps: 500,
        ..Default::default()
    })?;
    let ms = s.ms.clone().unwrap_or_else(|| vec![10, 20, 40, 80]);
    let mut store = s.store();
    let rows = run_rates(&ms, &base, &mut store)?;
    let text = match s.format(Format::Csv) {
        Format::Csv => emit_rates(&rows)?,
        Format::Json => to_json(&rows)?,
    };
    let mut o = Outcome {
        configs: ms.iter().map(|&m| ExperimentConfig { m, ..base }).collect(),
        ..Default::default()
    };
    emit(s, &text, &mut o)?;
    Ok(o)
}

/// Default configuration of each suite; flags override individual fields.
pub fn suite_defaults(suite: Suite) -> ExperimentConfig {
    let base = ExperimentConfig {
        m: 10,
        alpha: 2.0,
        hurst: 0.75,
        theta: 0.5,
        lambda_mode: LambdaMode::Explicit(1.0),
        reps: 50,
        master_seed: 1,
        quad: QuadMeta::default(),
    };
    match suite {
        Suite::Identity | Suite::All => base,
        Suite::Bounds => ExperimentConfig { reps: 2000, ..base },
        Suite::Distribution => ExperimentConfig {
            m: 200,
            alpha: 1.0,
            reps: 5000,
            ..base
        },
        Suite::Martingale => ExperimentConfig {
            alpha: 2.3,
            reps: 1000,
            ..base
        },
    }
}

fn cmd_verify(s: &Settings) -> Result<Outcome> {
    let suites = match s.suite.unwrap_or(Suite::All) {
        Suite::All => vec![Suite::Identity, Suite::Bounds, Suite::Distribution, Suite::Martingale],
        one => vec![one],
    };
    let mut store = s.store();
    let mut reports = Vec::new();
    let mut o = Outcome::default();
    for suite in suites {
        let c = s.experiment(suite_defaults(suite))?;
        o.configs.push(c);
        let rep = match suite {
            Suite::Identity => run_identity_suite(&c, &mut store)?,
            Suite::Bounds => {
                let hursts = s.hursts.clone().unwrap_or_else(|| vec![0.55, 0.65, 0.75, 0.85, 0.95]);
                let ms = s.ms.clone().unwrap_or_else(|| vec![10, 50, 100]);
                let grid: Vec<(u64, f64)> = ms.iter().flat_map(|&m| hursts.iter().map(move |&h| (m, h))).collect();
                run_bound_suite(&grid, c.alpha, c.lambda()?, &c, &mut store)?
            }
            Suite::Distribution => run_distribution_suite(&c, &mut store)?,
            Suite::Martingale => run_martingale_suite(&c, MartingaleOptions::default(), &mut store)?,
            Suite::All => unreachable!(),
        };
        for f in rep.failures() {
            eprintln!("FAIL {}::{} measured {:e} threshold {:e} ({})", rep.suite, f.name, f.measured, f.threshold, f.anchor);
        }
        o.verify_failed |= !rep.passed();
        reports.push(rep);
    }
    emit(s, &to_json(&reports)?, &mut o)?;
    Ok(o)
}
