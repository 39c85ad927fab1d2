//! Discrete Ornstein–Uhlenbeck recursion on the grid `t_j = j/m`,
//!
//! ```text
//! X_0 = 0,   X_{j+1} = (1 + θ/m) X_j + N_{j+1} - N_j,
//! ```
//!
//! and the observation-side quantities the estimators need. Summing the
//! recursion gives `X_k - (θ/m) y_k = N_k` with `y_k = X_0 + … + X_{k-1}`,
//! so the noise is recovered from observations by one triangular solve.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::CoefficientTable;
use crate::noise::dot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    Simulated { theta: f64, seed: Option<u64> },
    /// Read from outside; `shifted_by` is the first observation that was
    /// subtracted to force `X_0 = 0` (zero when nothing changed).
    Ingested { shifted_by: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationPath {
    values: Vec<f64>,
    m: u64,
    provenance: Provenance,
}

impl ObservationPath {
    /// Wrap external observations `X_0..X_n`. A nonzero `X_0` is subtracted
    /// from every value and recorded in the provenance.
    pub fn ingest(mut values: Vec<f64>, m: u64) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("an observation path needs at least X_0 and X_1"));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::CorruptedInput(format!("observation {i} is {v}")));
        }
        let x0 = values[0];
        if x0 != 0.0 {
            values.iter_mut().for_each(|v| *v -= x0);
        }
        Ok(Self {
            values,
            m,
            provenance: Provenance::Ingested { shifted_by: x0 },
        })
    }

    /// `X_0..X_n`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Number of steps `n`; the path holds `n + 1` values.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// True when ingestion had to shift the path to start at zero.
    pub fn was_shifted(&self) -> bool {
        matches!(self.provenance, Provenance::Ingested { shifted_by } if shifted_by != 0.0)
    }

    fn check(&self, table: &CoefficientTable) -> Result<()> {
        table.ensure_len(self.n(), "observation path")?;
        if self.m != table.m() {
            return Err(invalid(format!(
                "path has m = {} but the table has m = {}",
                self.m,
                table.m()
            )));
        }
        Ok(())
    }
}

/// Simulate `X_0..X_n` for drift `θ` and noise `η_1..η_n`.
pub fn simulate_ou(table: &CoefficientTable, theta: f64, eta: &[f64]) -> Result<ObservationPath> {
    simulate_with_seed(table, theta, eta, None)
}

pub(crate) fn simulate_with_seed(
    table: &CoefficientTable,
    theta: f64,
    eta: &[f64],
    seed: Option<u64>,
) -> Result<ObservationPath> {
    table.ensure_len(eta.len(), "noise")?;
    if !theta.is_finite() {
        return Err(invalid(format!("drift θ must be finite, got {theta}")));
    }
    let step = theta / table.m() as f64;
    let n = table.n();
    let mut x = Vec::with_capacity(n + 1);
    x.push(0.0);
    let mut prefix = 0.0;
    for k in 1..=n {
        prefix += x[k - 1];
        let walk = dot(table.row(k), &eta[..k]);
        x.push(walk + step * prefix);
    }
    Ok(ObservationPath {
        values: x,
        m: table.m(),
        provenance: Provenance::Simulated { theta, seed },
    })
}

/// `T_j` and `S_{j-1}` for `j = 1..n-1` together with the triangular solves
/// they come from. `u = b̃⁻¹ x` and `v = b̃⁻¹ y` with `y_k = x_0 + … + x_{k-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TsArrays {
    /// `t[j-1] = T_j`.
    pub t: Vec<f64>,
    /// `s[j-1] = S_{j-1}`.
    pub s: Vec<f64>,
    /// `u[i-1] = u_i`.
    pub u: Vec<f64>,
    /// `v[i-1] = v_i`.
    pub v: Vec<f64>,
}

impl TsArrays {
    /// `T_j`, `1 <= j <= n-1`.
    pub fn t_at(&self, j: usize) -> f64 {
        self.t[j - 1]
    }

    /// `S_{j-1}`, `1 <= j <= n-1`.
    pub fn s_before(&self, j: usize) -> f64 {
        self.s[j - 1]
    }
}

/// Forward substitution for `u` and `v` in one sweep over the table. The
/// partial row products needed for the next unknown are exactly
/// `Σ_{i<=j} b̃[j+1][i] u_i`, from which `T_j` and `S_{j-1}` follow by
/// subtracting `x_j` and `y_j`.
pub fn compute_ts(table: &CoefficientTable, x: &ObservationPath) -> Result<TsArrays> {
    x.check(table)?;
    let n = table.n();
    let xs = x.values();
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut t = Vec::with_capacity(n.saturating_sub(1));
    let mut s = Vec::with_capacity(n.saturating_sub(1));
    let mut y = 0.0;
    let mut y_prev = 0.0;
    for k in 1..=n {
        y += xs[k - 1];
        let row = table.row(k);
        let diag = row[k - 1];
        if diag == 0.0 {
            return Err(Error::SingularMatrix(k));
        }
        let (du, dv) = row[..k - 1]
            .iter()
            .zip(u.iter().zip(&v))
            .fold((0.0, 0.0), |(a, b), (r, (ui, vi))| (a + r * ui, b + r * vi));
        if k >= 2 {
            t.push(du - xs[k - 1]);
            s.push(dv - y_prev);
        }
        u.push((xs[k] - du) / diag);
        v.push((y - dv) / diag);
        y_prev = y;
    }
    Ok(TsArrays { t, s, u, v })
}

/// `η̂ = b̃⁻¹ (x - (θ/m) y)` by forward substitution.
pub fn reconstruct_noise(table: &CoefficientTable, x: &ObservationPath, theta: f64) -> Result<Vec<f64>> {
    x.check(table)?;
    let step = theta / table.m() as f64;
    let xs = x.values();
    let n = table.n();
    let mut eta = Vec::with_capacity(n);
    let mut y = 0.0;
    for k in 1..=n {
        y += xs[k - 1];
        let row = table.row(k);
        let diag = row[k - 1];
        if diag == 0.0 {
            return Err(Error::SingularMatrix(k));
        }
        let z = xs[k] - step * y;
        eta.push((z - dot(&row[..k - 1], &eta)) / diag);
    }
    Ok(eta)
}
