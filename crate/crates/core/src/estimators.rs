//! Closed-form drift estimators. With `w_j = X_j - S_{j-1}` and residual
//! `r_j = X_{j+1} - X_j - T_j`, summing over `j = 1..n-1`:
//!
//! ```text
//! A*    = Σ w_j² / F̃_j²
//! θ̂_LS = m Σ r_j w_j / F̃_j² / A*
//! θ̂_ML = m [Σ r_j w_j / F̃_j² + (κ - 1) Σ w_j / F̃_j] / A*
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::CoefficientTable;
use crate::model::{compute_ts, ObservationPath, TsArrays};

/// Relative floor on `A*` below which a path counts as degenerate.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub theta_ls: f64,
    pub theta_ml: f64,
    /// `A* = Σ F̃_j⁻² (X_j - S_{j-1})²`.
    pub a_star: f64,
    /// `⟨A⟩ = A* κ(1-κ)`.
    pub bracket: f64,
    /// `Σ F̃_j⁻¹ (X_j - S_{j-1})`, the extra term of the likelihood estimator.
    pub weighted_sum: f64,
    pub kappa: f64,
    pub n: usize,
    pub m: u64,
    pub alpha: f64,
    /// Largest distance of the noise reconstructed at `θ̂_ML` from the
    /// nearest admissible value `κ - 1` or `κ`.
    pub noise_residual: f64,
}

/// Both estimators in one pass.
pub fn estimate(x: &ObservationPath, table: &CoefficientTable) -> Result<EstimateResult> {
    let ts = compute_ts(table, x)?;
    estimate_with(x, table, &ts)
}

/// Both estimators from precomputed `T`, `S`.
pub fn estimate_with(x: &ObservationPath, table: &CoefficientTable, ts: &TsArrays) -> Result<EstimateResult> {
    let n = table.n();
    if n < 2 {
        return Err(invalid("estimation needs n >= 2"));
    }
    let xs = x.values();
    let mut num = 0.0;
    let mut a_star = 0.0;
    let mut weighted = 0.0;
    for j in 1..n {
        let f = table.big_f(j);
        let w = xs[j] - ts.s_before(j);
        let r = xs[j + 1] - xs[j] - ts.t_at(j);
        num += r * w / (f * f);
        a_star += w * w / (f * f);
        weighted += w / f;
    }
    if !(a_star >= DENOMINATOR_FLOOR * n as f64) {
        return Err(Error::DegeneratePath(format!(
            "denominator A* = {a_star:e} is below {DENOMINATOR_FLOOR:e}·n"
        )));
    }
    let m = table.m() as f64;
    let kappa = table.kappa();
    let theta_ls = m * num / a_star;
    let theta_ml = m * (num + (kappa - 1.0) * weighted) / a_star;

    let step = theta_ml / m;
    let noise_residual = ts
        .u
        .iter()
        .zip(&ts.v)
        .map(|(u, v)| {
            let e = u - step * v;
            (e - (kappa - 1.0)).abs().min((e - kappa).abs())
        })
        .fold(0.0, f64::max);

    Ok(EstimateResult {
        theta_ls,
        theta_ml,
        a_star,
        bracket: a_star * kappa * (1.0 - kappa),
        weighted_sum: weighted,
        kappa,
        n,
        m: table.m(),
        alpha: (n as f64).ln() / m.ln(),
        noise_residual,
    })
}

pub fn lse(x: &ObservationPath, table: &CoefficientTable) -> Result<f64> {
    estimate(x, table).map(|r| r.theta_ls)
}

pub fn mle(x: &ObservationPath, table: &CoefficientTable) -> Result<f64> {
    estimate(x, table).map(|r| r.theta_ml)
}

/// `m² κ(1-κ) / A*`, the conditional variance of the least squares error.
pub fn conditional_variance_formula(result: &EstimateResult) -> Result<f64> {
    if !(result.a_star > 0.0) {
        return Err(Error::DegeneratePath("A* is zero".into()));
    }
    let m = result.m as f64;
    Ok(m * m * result.kappa * (1.0 - result.kappa) / result.a_star)
}

/// Error normalization `c₁(m, α, H)`: `√(m^α)` below `H = 3/4`,
/// `√(m^α / ln m^α)` at `H = 3/4` and `m^{α(1-H)}` above.
pub fn normalization(m: u64, alpha: f64, hurst: f64) -> f64 {
    let size = (m as f64).powf(alpha);
    if (hurst - 0.75).abs() <= 1e-12 {
        (size / size.ln()).sqrt()
    } else if hurst < 0.75 {
        size.sqrt()
    } else {
        size.powf(1.0 - hurst)
    }
}

/// Variance rate `m^{3-α} κ(1-κ)` with `κ = e^{-λ/m^α}`.
pub fn rate_bound(m: u64, alpha: f64, lambda: f64) -> f64 {
    let mf = m as f64;
    let kappa = (-lambda / mf.powf(alpha)).exp();
    mf.powf(3.0 - alpha) * kappa * (1.0 - kappa)
}
