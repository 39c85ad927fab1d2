//! Replicated experiments: per-cell summaries, grids, histogram data and
//! empirical rates.
//!
//! Replication `r` always draws its noise from `stream_seed(master, r)`, so
//! results do not depend on how many worker threads run the cell.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{cache_file_name, cache_read, load_or_build};
use crate::error::{invalid, Result};
use crate::estimators::{estimate, normalization, rate_bound, EstimateResult};
use crate::kernel::{CoefficientTable, QuadMeta, TableSpec, DEFAULT_MAX_N};
use crate::model::simulate_with_seed;
use crate::noise::{sample_eta, stream_seed, LambdaMode, NoiseSpec};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub m: u64,
    pub alpha: f64,
    pub hurst: f64,
    pub theta: f64,
    pub lambda_mode: LambdaMode,
    pub reps: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub quad: QuadMeta,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 10,
            alpha: 2.0,
            hurst: 0.75,
            theta: 0.5,
            lambda_mode: LambdaMode::default(),
            reps: 100,
            master_seed: 1,
            quad: QuadMeta::default(),
        }
    }
}

impl ExperimentConfig {
    /// Table inputs implied by the config; also validates every field.
    pub fn table_spec(&self) -> Result<TableSpec> {
        if self.reps < 1 {
            return Err(invalid("replication count must be at least 1"));
        }
        if !self.theta.is_finite() {
            return Err(invalid(format!("drift θ must be finite, got {}", self.theta)));
        }
        let probe = TableSpec::new(self.m, self.alpha, self.hurst, 1.0, self.quad)?;
        let lambda = self.lambda_mode.resolve(self.m, probe.n);
        TableSpec::new(self.m, self.alpha, self.hurst, lambda, self.quad)
    }

    pub fn lambda(&self) -> Result<f64> {
        Ok(self.table_spec()?.lambda)
    }
}

/// Mean, variance, bias and mean squared error of one estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub mean: f64,
    /// Sample variance with denominator `reps - 1`.
    pub variance: f64,
    pub bias: f64,
    /// `mean((θ̂ - θ)²)`.
    pub mse: f64,
}

impl EstimatorSummary {
    pub fn from_estimates(estimates: &[f64], theta: f64) -> Self {
        let mean = stats::mean(estimates);
        let mse = estimates.iter().map(|e| (e - theta).powi(2)).sum::<f64>() / estimates.len() as f64;
        Self {
            mean,
            variance: stats::variance(estimates),
            bias: mean - theta,
            mse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Lse,
    Mle,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Lse => "lse",
            Estimator::Mle => "mle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub config: ExperimentConfig,
    pub lambda: f64,
    pub kappa: f64,
    pub n: usize,
    pub lse: EstimatorSummary,
    pub mle: EstimatorSummary,
    pub lse_estimates: Vec<f64>,
    pub mle_estimates: Vec<f64>,
    /// `c₁(m, α, H)`.
    pub normalization: f64,
    pub table_checksum: u64,
    pub warnings: Vec<String>,
    /// Excluded from every data output.
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

impl McSummary {
    pub fn summary(&self, which: Estimator) -> &EstimatorSummary {
        match which {
            Estimator::Lse => &self.lse,
            Estimator::Mle => &self.mle,
        }
    }

    pub fn estimates(&self, which: Estimator) -> &[f64] {
        match which {
            Estimator::Lse => &self.lse_estimates,
            Estimator::Mle => &self.mle_estimates,
        }
    }

    /// `c₁ (θ̂ - θ)` for every replication.
    pub fn normalized_errors(&self, which: Estimator) -> Vec<f64> {
        self.estimates(which)
            .iter()
            .map(|e| self.normalization * (e - self.config.theta))
            .collect()
    }
}

/// Supplies coefficient tables, reusing work where possible. A table for
/// intensity λ is the λ = 1 table rescaled by `1/√λ`, which matches a
/// direct build bit for bit, so every route yields the same entries.
pub struct TableStore {
    cache_dir: Option<PathBuf>,
    max_n: usize,
    base: Option<Arc<CoefficientTable>>,
    current: Option<Arc<CoefficientTable>>,
}

impl TableStore {
    pub fn new(cache_dir: Option<PathBuf>) -> Self {
        Self::with_max_n(cache_dir, DEFAULT_MAX_N)
    }

    pub fn with_max_n(cache_dir: Option<PathBuf>, max_n: usize) -> Self {
        Self {
            cache_dir,
            max_n,
            base: None,
            current: None,
        }
    }

    pub fn cache_dir(&self) -> Option<&Path> {
        self.cache_dir.as_deref()
    }

    pub fn get(&mut self, spec: &TableSpec) -> Result<Arc<CoefficientTable>> {
        if let Some(cur) = &self.current {
            if table_matches(cur, spec) {
                return Ok(cur.clone());
            }
        }
        // drop the previous table first to keep peak memory low
        self.current = None;
        if let Some(dir) = &self.cache_dir {
            let path = dir.join(cache_file_name(spec));
            if path.exists() {
                if let Ok(t) = cache_read(&path, spec) {
                    let t = Arc::new(t);
                    self.current = Some(t.clone());
                    return Ok(t);
                }
            }
        }
        let base_spec = TableSpec { lambda: 1.0, ..*spec };
        let reuse = matches!(&self.base, Some(b) if table_matches(b, &base_spec));
        if !reuse {
            self.base = None;
            let built = load_or_build(&base_spec, self.cache_dir.as_deref(), self.max_n)?;
            self.base = Some(Arc::new(built.table));
        }
        let base = self.base.clone().expect("base table present");
        let t = if spec.lambda == 1.0 {
            base
        } else {
            Arc::new(base.with_lambda(spec.lambda)?)
        };
        self.current = Some(t.clone());
        Ok(t)
    }
}

fn table_matches(t: &CoefficientTable, spec: &TableSpec) -> bool {
    t.m() == spec.m
        && t.n() == spec.n
        && t.hurst().to_bits() == spec.hurst.to_bits()
        && t.lambda().to_bits() == spec.lambda.to_bits()
        && t.quad() == spec.quad
}

/// One replication: noise stream, simulated path and both estimates.
pub fn replicate(config: &ExperimentConfig, table: &CoefficientTable, rep: u64) -> Result<EstimateResult> {
    let seed = stream_seed(config.master_seed, rep);
    let eta = sample_eta(NoiseSpec::for_table(table), seed);
    let x = simulate_with_seed(table, config.theta, eta.values(), Some(seed))?;
    estimate(&x, table)
}

/// Run all replications of a cell against a ready table.
pub fn run_cell_with_table(config: &ExperimentConfig, table: &CoefficientTable) -> Result<McSummary> {
    let spec = config.table_spec()?;
    if !table_matches(table, &spec) {
        return Err(invalid("coefficient table does not match the experiment config"));
    }
    let start = Instant::now();
    let results: Vec<EstimateResult> = (0..config.reps as u64)
        .into_par_iter()
        .map(|r| replicate(config, table, r))
        .collect::<Result<_>>()?;
    let lse_estimates: Vec<f64> = results.iter().map(|r| r.theta_ls).collect();
    let mle_estimates: Vec<f64> = results.iter().map(|r| r.theta_ml).collect();
    let mut warnings = Vec::new();
    if config.reps == 1 {
        warnings.push("single replication: variance reported as 0".to_string());
    }
    Ok(McSummary {
        config: *config,
        lambda: spec.lambda,
        kappa: table.kappa(),
        n: spec.n,
        lse: EstimatorSummary::from_estimates(&lse_estimates, config.theta),
        mle: EstimatorSummary::from_estimates(&mle_estimates, config.theta),
        lse_estimates,
        mle_estimates,
        normalization: normalization(config.m, config.alpha, config.hurst),
        table_checksum: table.checksum(),
        warnings,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

pub fn run_cell(config: &ExperimentConfig, store: &mut TableStore) -> Result<McSummary> {
    let table = store.get(&config.table_spec()?)?;
    run_cell_with_table(config, &table)
}

/// One grid entry; failures are kept as messages so the grid can go on.
#[derive(Debug, Clone)]
pub struct GridCell {
    pub config: ExperimentConfig,
    pub outcome: std::result::Result<McSummary, String>,
}

/// Run every config. Cells sharing a kernel run back to back so each table
/// is built once.
pub fn run_grid(configs: &[ExperimentConfig], store: &mut TableStore) -> Vec<GridCell> {
    let mut order: Vec<usize> = (0..configs.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&configs[a], &configs[b]);
        let key = |c: &ExperimentConfig| {
            let lambda = c.lambda().unwrap_or(f64::NAN);
            (c.m, c.hurst.to_bits(), c.alpha.to_bits(), lambda != 1.0, lambda.to_bits())
        };
        key(x).cmp(&key(y))
    });
    let mut out: Vec<Option<GridCell>> = vec![None; configs.len()];
    for i in order {
        let config = configs[i];
        let outcome = run_cell(&config, store).map_err(|e| e.to_string());
        out[i] = Some(GridCell { config, outcome });
    }
    out.into_iter().map(|c| c.expect("every cell ran")).collect()
}

/// Which estimators a table reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableLayout {
    Both,
    MleOnly,
}

impl TableLayout {
    fn estimators(&self) -> &'static [Estimator] {
        match self {
            TableLayout::Both => &[Estimator::Lse, Estimator::Mle],
            TableLayout::MleOnly => &[Estimator::Mle],
        }
    }
}

pub const GRID_HEADER: [&str; 12] = [
    "theta", "H", "m", "alpha", "lambda", "reps", "estimator", "mean", "variance", "bias", "mse", "status",
];

/// Grid as CSV, ordered by `(H, θ, m, α, λ, estimator)`.
pub fn emit_table(grid: &[GridCell], layout: TableLayout) -> Result<String> {
    let mut cells: Vec<&GridCell> = grid.iter().collect();
    let lambda_of = |c: &GridCell| match &c.outcome {
        Ok(s) => s.lambda,
        Err(_) => c.config.lambda().unwrap_or(f64::NAN),
    };
    cells.sort_by(|a, b| {
        let ka = (a.config.hurst, a.config.theta, a.config.m as f64, a.config.alpha, lambda_of(a));
        let kb = (b.config.hurst, b.config.theta, b.config.m as f64, b.config.alpha, lambda_of(b));
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(GRID_HEADER).map_err(csv_err)?;
    for cell in cells {
        let c = &cell.config;
        for est in layout.estimators() {
            let mut rec = vec![
                c.theta.to_string(),
                c.hurst.to_string(),
                c.m.to_string(),
                c.alpha.to_string(),
                lambda_of(cell).to_string(),
                c.reps.to_string(),
                est.name().to_string(),
            ];
            match &cell.outcome {
                Ok(s) => {
                    let e = s.summary(*est);
                    rec.extend([e.mean, e.variance, e.bias, e.mse].map(|v| v.to_string()));
                    rec.push("ok".into());
                }
                Err(msg) => {
                    rec.extend(std::iter::repeat_n(String::new(), 4));
                    rec.push(format!("error: {msg}"));
                }
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    finish_csv(w)
}

pub const HIST_HEADER: [&str; 9] = ["H", "theta", "m", "alpha", "rep", "estimator", "estimate", "c1", "normalized"];

/// One row per summary, replication and estimator: raw estimate and
/// `c₁ (θ̂ - θ)`.
pub fn emit_histograms(summaries: &[McSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HIST_HEADER).map_err(csv_err)?;
    for summary in summaries {
        let c = &summary.config;
        for est in [Estimator::Lse, Estimator::Mle] {
            let norm = summary.normalized_errors(est);
            for (r, (e, z)) in summary.estimates(est).iter().zip(&norm).enumerate() {
                w.write_record([
                    c.hurst.to_string(),
                    c.theta.to_string(),
                    c.m.to_string(),
                    c.alpha.to_string(),
                    r.to_string(),
                    est.name().to_string(),
                    e.to_string(),
                    summary.normalization.to_string(),
                    z.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    finish_csv(w)
}

/// Empirical variances and the rate `m^{3-α} κ(1-κ)` at one `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub m: u64,
    pub n: usize,
    pub lambda: f64,
    pub reps: usize,
    pub var_lse: f64,
    pub var_mle: f64,
    pub bias_lse: f64,
    pub bias_mle: f64,
    pub bound: f64,
}

pub fn run_rates(m_grid: &[u64], base: &ExperimentConfig, store: &mut TableStore) -> Result<Vec<RateRow>> {
    if m_grid.is_empty() {
        return Err(invalid("rate study needs at least one m"));
    }
    m_grid
        .iter()
        .map(|&m| {
            let config = ExperimentConfig { m, ..*base };
            let s = run_cell(&config, store)?;
            Ok(RateRow {
                m,
                n: s.n,
                lambda: s.lambda,
                reps: config.reps,
                var_lse: s.lse.variance,
                var_mle: s.mle.variance,
                bias_lse: s.lse.bias,
                bias_mle: s.mle.bias,
                bound: rate_bound(m, config.alpha, s.lambda),
            })
        })
        .collect()
}

pub const RATES_HEADER: [&str; 9] = ["m", "n", "lambda", "reps", "var_lse", "var_mle", "bias_lse", "bias_mle", "bound"];

pub fn emit_rates(rows: &[RateRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RATES_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.m.to_string(),
            r.n.to_string(),
            r.lambda.to_string(),
            r.reps.to_string(),
            r.var_lse.to_string(),
            r.var_mle.to_string(),
            r.bias_lse.to_string(),
            r.bias_mle.to_string(),
            r.bound.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w)
}

/// Single-cell summary CSV (both estimators).
pub fn emit_summary(summary: &McSummary) -> Result<String> {
    emit_table(
        &[GridCell {
            config: summary.config,
            outcome: Ok(summary.clone()),
        }],
        TableLayout::Both,
    )
}

pub(crate) fn csv_err(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => crate::error::Error::CorruptedInput(format!("csv: {other:?}")),
    }
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| crate::error::Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// The nine `(θ, H)` cells of the reference tables at one `m`.
pub fn reference_grid(m: u64, alpha: f64, lambda_mode: LambdaMode, reps: usize, master_seed: u64) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for &hurst in &[0.55, 0.75, 0.90] {
        for &theta in &[0.1, 0.5, 0.9] {
            out.push(ExperimentConfig {
                m,
                alpha,
                hurst,
                theta,
                lambda_mode,
                reps,
                master_seed,
                quad: QuadMeta::default(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            m: 5,
            alpha: 2.0,
            hurst: 0.75,
            theta: 0.5,
            reps: 20,
            master_seed: 9,
            ..Default::default()
        }
    }

    #[test]
    fn mse_identity() {
        let mut store = TableStore::new(None);
        let s = run_cell(&small(), &mut store).unwrap();
        for e in [s.lse, s.mle] {
            let r = small().reps as f64;
            let want = e.variance * (r - 1.0) / r + e.bias * e.bias;
            assert!((e.mse - want).abs() <= 1e-12 * e.mse.max(1.0));
        }
    }

    #[test]
    fn single_replication_matches_direct_estimate() {
        let cfg = ExperimentConfig { reps: 1, ..small() };
        let mut store = TableStore::new(None);
        let s = run_cell(&cfg, &mut store).unwrap();
        let t = store.get(&cfg.table_spec().unwrap()).unwrap();
        let r = replicate(&cfg, &t, 0).unwrap();
        assert_eq!(s.lse_estimates, vec![r.theta_ls]);
        assert_eq!(s.lse.variance, 0.0);
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn empty_grid_is_header_only() {
        let csv = emit_table(&[], TableLayout::Both).unwrap();
        assert_eq!(csv, format!("{}\n", GRID_HEADER.join(",")));
    }

    #[test]
    fn fbm_symmetric_equals_explicit_lambda() {
        let sym = ExperimentConfig {
            lambda_mode: LambdaMode::FbmSymmetric,
            ..small()
        };
        let n = sym.table_spec().unwrap().n;
        let exp = ExperimentConfig {
            lambda_mode: LambdaMode::Explicit(n as f64 * std::f64::consts::LN_2),
            ..small()
        };
        let mut store = TableStore::new(None);
        let a = run_cell(&sym, &mut store).unwrap();
        let b = run_cell(&exp, &mut TableStore::new(None)).unwrap();
        assert_eq!(a.lse_estimates, b.lse_estimates);
        assert_eq!(a.mle_estimates, b.mle_estimates);
        assert!((a.kappa - 0.5).abs() < 1e-15);
    }

    #[test]
    fn failing_cell_is_recorded() {
        let bad = ExperimentConfig { hurst: 0.4, ..small() };
        let grid = run_grid(&[bad, small()], &mut TableStore::new(None));
        let csv = emit_table(&grid, TableLayout::Both).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().any(|l| l.contains("error: invalid argument")));
        assert!(csv.lines().filter(|l| l.ends_with(",ok")).count() == 2);
    }

    #[test]
    fn histogram_rows() {
        let mut store = TableStore::new(None);
        let s = run_cell(&small(), &mut store).unwrap();
        let csv = emit_histograms(std::slice::from_ref(&s)).unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * small().reps);
    }
}
