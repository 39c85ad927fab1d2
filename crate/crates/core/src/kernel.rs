//! The fractional kernel
//!
//! ```text
//! K(t, s) = s^{1/2-H} / Γ(H-1/2) · ∫_s^t τ^{H-1/2} (τ - s)^{H-3/2} dτ,   s < t,
//! ```
//!
//! and the lower-triangular table of its block integrals
//! `b[k][i] = m ∫_{(i-1)/m}^{i/m} K(k/m, s) ds`, stored already divided by `√λ`.
//!
//! Two routes evaluate the kernel. [`kernel_eval`] follows the definition with
//! a Gauss–Jacobi rule for the `(τ - s)^{H-3/2}` factor. [`kernel_exact`] and
//! the table builder use closed forms in terms of regularized incomplete beta
//! functions: with `x = s/τ` the inner integral becomes
//! `s^{2H-1} ∫_{s/t}^1 x^{-2H}(1-x)^{H-3/2} dx`, and one integration by parts
//! turns the negative first exponent into a regular incomplete beta. The
//! primitive `φ(z) = ∫_0^z K(1, s) ds` then satisfies
//!
//! ```text
//! Γ(H-1/2)(H+1/2) φ(z) = B(3/2-H, H-1/2) I_z(3/2-H, H-1/2) + z^{H+1/2} G(z)
//! G(z) = z^{1-2H} (1-z)^{H-1/2} / (2H-1) + B(2-2H, H-1/2) I_{1-z}(H-1/2, 2-2H) / 2
//! ```
//!
//! and `K(t, s) = t^{H-1/2} K(1, s/t)` gives every block integral as a
//! difference of `φ` at `(i-1)/k` and `i/k`.

use rayon::prelude::*;
use statrs::function::beta::{beta, beta_reg};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{gauss_jacobi, gauss_legendre, QuadratureRule};

/// Smallest admissible distance of `H` above 1/2.
pub const HURST_MARGIN: f64 = 1e-3;

/// Default largest sample count for a dense table (≈1.6 GB of entries).
pub const DEFAULT_MAX_N: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    hurst: f64,
    gamma_factor: f64,
}

impl KernelParams {
    pub fn new(hurst: f64) -> Result<Self> {
        validate_hurst(hurst)?;
        Ok(Self {
            hurst,
            gamma_factor: 1.0 / gamma(hurst - 0.5),
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// `1 / Γ(H - 1/2)`.
    pub fn gamma_factor(&self) -> f64 {
        self.gamma_factor
    }

    /// `c_H = 1 / [Γ(H-1/2)(H-1/2)(H+1/2)]`, the constant in the diagonal
    /// lower bound `√λ F_j >= c_H m^{1/2-H}`.
    pub fn diagonal_bound_constant(&self) -> f64 {
        let h = self.hurst;
        self.gamma_factor / ((h - 0.5) * (h + 0.5))
    }
}

pub fn validate_hurst(hurst: f64) -> Result<()> {
    if !(hurst > 0.5 + HURST_MARGIN && hurst < 1.0) {
        return Err(invalid(format!(
            "Hurst index {hurst} outside ({}, 1)",
            0.5 + HURST_MARGIN
        )));
    }
    Ok(())
}

/// Kernel by its defining integral. After `τ = s + (t - s) u` the inner
/// integral is `(t-s)^{H-1/2} ∫₀¹ u^{H-3/2} (s + (t-s) u)^{H-1/2} du`, done
/// with a Gauss–Jacobi rule of `inner_order` points.
pub fn kernel_eval(t: f64, s: f64, params: &KernelParams, inner_order: usize) -> Result<f64> {
    let rule = gauss_jacobi(inner_order, params.hurst - 1.5)?;
    kernel_with_rule(t, s, params, &rule)
}

pub(crate) fn kernel_with_rule(
    t: f64,
    s: f64,
    params: &KernelParams,
    rule: &QuadratureRule,
) -> Result<f64> {
    check_kernel_args(t, s)?;
    if s >= t {
        return Ok(0.0);
    }
    let h = params.hurst;
    let w = t - s;
    let inner = rule.integrate(|u| (s + w * u).powf(h - 0.5));
    Ok(params.gamma_factor * s.powf(0.5 - h) * w.powf(h - 0.5) * inner)
}

/// Kernel through the incomplete-beta closed form.
pub fn kernel_exact(t: f64, s: f64, params: &KernelParams) -> Result<f64> {
    check_kernel_args(t, s)?;
    if s >= t {
        return Ok(0.0);
    }
    let prim = Primitive::new(params.hurst);
    let z = s / t;
    let zc = (t - s) / t;
    Ok(params.gamma_factor * s.powf(params.hurst - 0.5) * prim.g(z, zc))
}

fn check_kernel_args(t: f64, s: f64) -> Result<()> {
    if !(s > 0.0) {
        return Err(invalid(format!("kernel needs s > 0, got {s}")));
    }
    if !(t > 0.0) {
        return Err(invalid(format!("kernel needs t > 0, got {t}")));
    }
    Ok(())
}

/// Closed-form pieces of `φ(z) = ∫₀^z K(1, s) ds`, all multiplied by
/// `Γ(H-1/2)(H+1/2)`.
#[derive(Debug, Clone, Copy)]
struct Primitive {
    hurst: f64,
    /// B(3/2 - H, H - 1/2), the scaled value of φ(1)
    full: f64,
    half_b2: f64,
}

impl Primitive {
    fn new(hurst: f64) -> Self {
        let q = hurst - 0.5;
        Self {
            hurst,
            full: beta(1.5 - hurst, q),
            half_b2: 0.5 * beta(2.0 - 2.0 * hurst, q),
        }
    }

    /// `G(z) = ∫_z^1 x^{-2H}(1-x)^{H-3/2} dx`, with `zc = 1 - z` supplied
    /// exactly by the caller.
    fn g(&self, z: f64, zc: f64) -> f64 {
        let h = self.hurst;
        let q = h - 0.5;
        z.powf(1.0 - 2.0 * h) * zc.powf(q) / (2.0 * h - 1.0)
            + self.half_b2 * beta_reg(q, 2.0 - 2.0 * h, zc)
    }

    /// Scaled `φ(z)`, accurate for `z <= 1/2`.
    fn left_tail(&self, z: f64, zc: f64) -> f64 {
        if z == 0.0 {
            return 0.0;
        }
        let h = self.hurst;
        self.full * beta_reg(1.5 - h, h - 0.5, z) + z.powf(h + 0.5) * self.g(z, zc)
    }

    /// Scaled `φ(1) - φ(z)`, accurate for `z >= 1/2`.
    fn right_tail(&self, z: f64, zc: f64) -> f64 {
        if zc == 0.0 {
            return 0.0;
        }
        let h = self.hurst;
        self.full * beta_reg(h - 0.5, 1.5 - h, zc) - z.powf(h + 0.5) * self.g(z, zc)
    }

    /// Scaled `φ` at `i/k`, measured from whichever end of `[0, 1]` is
    /// closer; the flag says which (`true` for the left end).
    fn endpoint(&self, i: usize, k: usize) -> (bool, f64) {
        let kf = k as f64;
        let z = i as f64 / kf;
        let zc = (k - i) as f64 / kf;
        if 2 * i <= k {
            (true, self.left_tail(z, zc))
        } else {
            (false, self.right_tail(z, zc))
        }
    }

    /// Difference of two endpoint values, keeping relative accuracy.
    fn span(&self, lo: (bool, f64), hi: (bool, f64)) -> f64 {
        match (lo, hi) {
            ((true, a), (true, b)) => b - a,
            ((false, a), (false, b)) => a - b,
            ((true, a), (false, b)) => (self.full - b) - a,
            ((false, a), (true, b)) => b - (self.full - a),
        }
    }

    /// Scaled block integrals `∫_{(i-1)/k}^{i/k} K(1, s) ds` for `i = 1..=k`,
    /// written into `out`.
    fn row_blocks(&self, k: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), k);
        let mut prev = self.endpoint(0, k);
        for i in 1..=k {
            let cur = self.endpoint(i, k);
            out[i - 1] = self.span(prev, cur);
            prev = cur;
        }
    }

    /// Last block of row `k`.
    fn diagonal_block(&self, k: usize) -> f64 {
        self.span(self.endpoint(k - 1, k), self.endpoint(k, k))
    }

    fn scale(&self) -> f64 {
        gamma(self.hurst - 0.5) * (self.hurst + 0.5)
    }
}

/// Quadrature orders for the kernel-by-definition route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct QuadMeta {
    pub inner_order: u32,
    pub outer_order: u32,
}

impl Default for QuadMeta {
    fn default() -> Self {
        Self {
            inner_order: 16,
            outer_order: 8,
        }
    }
}

/// Unscaled `b[k][i] = m ∫_{(i-1)/m}^{i/m} K(k/m, s) ds` from the closed form.
pub fn coeff_entry(k: usize, i: usize, m: u64, params: &KernelParams) -> Result<f64> {
    check_indices(k, i, m)?;
    let prim = Primitive::new(params.hurst);
    let mut row = vec![0.0; k];
    prim.row_blocks(k, &mut row);
    Ok(block_factor(k, m, params.hurst) * row[i - 1] / prim.scale())
}

/// Unscaled `b[k][i]` by nested quadrature: the outer integral over `s` uses
/// Gauss–Jacobi with weight `s^{1/2-H}` on the first block and
/// Gauss–Legendre elsewhere; the kernel itself comes from [`kernel_eval`].
pub fn coeff_entry_quadrature(
    k: usize,
    i: usize,
    m: u64,
    params: &KernelParams,
    quad: QuadMeta,
) -> Result<f64> {
    check_indices(k, i, m)?;
    let h = params.hurst;
    let inner = gauss_jacobi(quad.inner_order as usize, h - 1.5)?;
    let mf = m as f64;
    let t = k as f64 / mf;
    let lo = (i - 1) as f64 / mf;
    let hi = i as f64 / mf;
    let kern = |s: f64| kernel_with_rule(t, s, params, &inner).unwrap_or(f64::NAN);
    let value = if i == 1 {
        let outer = gauss_jacobi(quad.outer_order as usize, 0.5 - h)?;
        outer.integrate_left(lo, hi, |s| kern(s) * s.powf(h - 0.5))
    } else {
        let outer = gauss_legendre(quad.outer_order as usize)?;
        outer.integrate_left(lo, hi, kern)
    };
    Ok(mf * value)
}

fn check_indices(k: usize, i: usize, m: u64) -> Result<()> {
    if m < 1 {
        return Err(invalid("grid denominator m must be positive"));
    }
    if !(1 <= i && i <= k) {
        return Err(invalid(format!(
            "coefficient index (k={k}, i={i}) outside 1 <= i <= k"
        )));
    }
    Ok(())
}

/// `m ∫ K(k/m, s) ds` over a block equals `m^{1/2-H} k^{H+1/2}` times the
/// block integral of `K(1, ·)` over `[(i-1)/k, i/k]`.
fn block_factor(k: usize, m: u64, hurst: f64) -> f64 {
    (m as f64).powf(0.5 - hurst) * (k as f64).powf(hurst + 0.5)
}

/// `n = round(m^α)`.
pub fn sample_count(m: u64, alpha: f64) -> usize {
    (m as f64).powf(alpha).round() as usize
}

/// Dense lower-triangular table `b̃ = b / √λ`, packed row by row:
/// row `k` (1-based) holds `b̃[k][1..=k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub(crate) m: u64,
    pub(crate) n: usize,
    pub(crate) hurst: f64,
    pub(crate) lambda: f64,
    pub(crate) quad: QuadMeta,
    pub(crate) entries: Vec<f64>,
}

/// Packed offset of row `k` (1-based).
#[inline]
pub(crate) fn row_offset(k: usize) -> usize {
    k * (k - 1) / 2
}

impl CoefficientTable {
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn quad(&self) -> QuadMeta {
        self.quad
    }

    /// `κ = e^{-λ/n}`.
    pub fn kappa(&self) -> f64 {
        (-self.lambda / self.n as f64).exp()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `b̃[k][i]` for `1 <= i <= k <= n`; zero above the diagonal.
    pub fn entry(&self, k: usize, i: usize) -> f64 {
        assert!(k >= 1 && k <= self.n && i >= 1, "index ({k}, {i}) out of range");
        if i > k {
            0.0
        } else {
            self.entries[row_offset(k) + i - 1]
        }
    }

    /// Row `k`: `b̃[k][1..=k]`.
    #[inline]
    pub fn row(&self, k: usize) -> &[f64] {
        let start = row_offset(k);
        &self.entries[start..start + k]
    }

    /// `F̃_j = b̃[j+1][j+1]`, `0 <= j <= n-1`.
    #[inline]
    pub fn big_f(&self, j: usize) -> f64 {
        self.entries[row_offset(j + 1) + j]
    }

    /// `f̃_{ij} = b̃[j+1][i] - b̃[j][i]`, `1 <= i <= j <= n-1`.
    pub fn small_f(&self, i: usize, j: usize) -> f64 {
        assert!(1 <= i && i <= j && j < self.n, "f index ({i}, {j}) out of range");
        self.entry(j + 1, i) - self.entry(j, i)
    }

    /// Same table with every entry multiplied by `c`. Used to check
    /// scale behaviour of the estimators.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.entries.iter_mut().for_each(|e| *e *= c);
        out
    }

    /// Same kernel, different intensity: `b̃` is rescaled by `√(λ_old/λ_new)`
    /// through the unscaled entries, matching a fresh build up to rounding.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        validate_lambda(lambda)?;
        let back = self.lambda.sqrt();
        let fwd = 1.0 / lambda.sqrt();
        let mut out = self.clone();
        out.lambda = lambda;
        out.entries.iter_mut().for_each(|e| *e = (*e * back) * fwd);
        Ok(out)
    }

    /// Independent copy with one packed entry perturbed; for sensitivity checks.
    pub fn perturbed(&self, k: usize, i: usize, delta: f64) -> Self {
        let mut out = self.clone();
        out.entries[row_offset(k) + i - 1] += delta;
        out
    }

    pub fn checksum(&self) -> u64 {
        crate::cache::payload_checksum(&self.entries)
    }

    pub(crate) fn ensure_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.n {
            return Err(invalid(format!(
                "{what} has length {len} but the table has n = {}",
                self.n
            )));
        }
        Ok(())
    }
}

pub fn validate_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("intensity λ must be positive, got {lambda}")));
    }
    Ok(())
}

/// Inputs that determine a table.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TableSpec {
    pub m: u64,
    pub n: usize,
    pub hurst: f64,
    pub lambda: f64,
    pub quad: QuadMeta,
}

impl TableSpec {
    pub fn new(m: u64, alpha: f64, hurst: f64, lambda: f64, quad: QuadMeta) -> Result<Self> {
        if m < 2 {
            return Err(invalid(format!("grid denominator m must be >= 2, got {m}")));
        }
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(invalid(format!("sample exponent α must be >= 1, got {alpha}")));
        }
        validate_hurst(hurst)?;
        validate_lambda(lambda)?;
        Ok(Self {
            m,
            n: sample_count(m, alpha),
            hurst,
            lambda,
            quad,
        })
    }
}

pub fn build_table(m: u64, alpha: f64, hurst: f64, lambda: f64, quad: QuadMeta) -> Result<CoefficientTable> {
    build_from_spec(&TableSpec::new(m, alpha, hurst, lambda, quad)?, DEFAULT_MAX_N)
}

/// Build the full table. Rows are independent and computed in parallel.
pub fn build_from_spec(spec: &TableSpec, max_n: usize) -> Result<CoefficientTable> {
    let n = spec.n;
    if n == 0 {
        return Err(invalid("sample count n must be positive"));
    }
    if n > max_n {
        let gb = (n as f64) * (n as f64 + 1.0) / 2.0 * 8.0 / 1e9;
        return Err(Error::ResourceLimit(format!(
            "table with n = {n} needs {gb:.1} GB (cap n <= {max_n}); lower m or α, \
             or raise the cap and reuse a cache file"
        )));
    }
    let params = KernelParams::new(spec.hurst)?;
    validate_lambda(spec.lambda)?;

    let prim = Primitive::new(spec.hurst);
    let inv_scale = 1.0 / prim.scale();
    let inv_sqrt_lambda = 1.0 / spec.lambda.sqrt();
    let mut entries = vec![0.0; n * (n + 1) / 2];

    let mut rows: Vec<(usize, &mut [f64])> = Vec::with_capacity(n);
    let mut rest = entries.as_mut_slice();
    for k in 1..=n {
        let (head, tail) = rest.split_at_mut(k);
        rows.push((k, head));
        rest = tail;
    }
    rows.into_par_iter().for_each(|(k, row)| {
        prim.row_blocks(k, row);
        let factor = block_factor(k, spec.m, params.hurst) * inv_scale;
        // the 1/√λ step is kept separate so `with_lambda` on a λ = 1 table
        // reproduces a fresh build bit for bit
        row.iter_mut().for_each(|e| *e = (*e * factor) * inv_sqrt_lambda);
    });

    Ok(CoefficientTable {
        m: spec.m,
        n,
        hurst: spec.hurst,
        lambda: spec.lambda,
        quad: spec.quad,
        entries,
    })
}

/// `F̃_j` for `j = 0..n-1` without building the table; bit-identical to
/// the table diagonal.
pub fn diagonal(m: u64, n: usize, hurst: f64, lambda: f64) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(invalid("grid denominator m must be positive"));
    }
    let params = KernelParams::new(hurst)?;
    validate_lambda(lambda)?;
    let prim = Primitive::new(hurst);
    let inv_scale = 1.0 / prim.scale();
    let inv_sqrt_lambda = 1.0 / lambda.sqrt();
    Ok((1..=n)
        .into_par_iter()
        .map(|k| {
            let factor = block_factor(k, m, params.hurst) * inv_scale;
            (prim.diagonal_block(k) * factor) * inv_sqrt_lambda
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{adaptive_singular, SingularEnd};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// Kernel by adaptive integration of the defining integral, written in
    /// the offset variable `v = τ - s` so the singular point sits at 0.
    fn kernel_oracle(t: f64, s: f64, h: f64) -> f64 {
        let f = |v: f64| (s + v).powf(h - 0.5) * v.powf(h - 1.5);
        let w = t - s;
        let split = w.min(s);
        let mut inner = adaptive_singular(f, 0.0, split, SingularEnd::Left, 1e-14).unwrap();
        if split < w {
            inner += adaptive_singular(f, split, w, SingularEnd::None, 1e-14).unwrap();
        }
        s.powf(0.5 - h) * inner / gamma(h - 0.5)
    }

    #[test]
    fn gamma_factor_matches_reference_values() {
        // Γ(1/4) and Γ(1/20) to 20 digits
        let p = KernelParams::new(0.75).unwrap();
        assert!(rel(1.0 / p.gamma_factor(), 3.625_609_908_221_908) < 1e-12);
        let p = KernelParams::new(0.55).unwrap();
        assert!(rel(1.0 / p.gamma_factor(), 19.470_085_311_255_51) < 1e-12);
        // c_H at H = 3/4
        let c = KernelParams::new(0.75).unwrap().diagonal_bound_constant();
        assert!((c - 0.8826).abs() < 1e-4, "{c}");
    }

    #[test]
    fn rejects_hurst_out_of_range() {
        for h in [0.5, 0.5005, 1.0, 1.2, f64::NAN] {
            assert!(KernelParams::new(h).is_err(), "H = {h}");
        }
    }

    #[test]
    fn kernel_vanishes_on_and_above_diagonal() {
        let p = KernelParams::new(0.75).unwrap();
        assert_eq!(kernel_eval(0.7, 0.7, &p, 16).unwrap(), 0.0);
        assert_eq!(kernel_exact(0.7, 0.9, &p).unwrap(), 0.0);
        assert!(kernel_eval(1.0, 0.0, &p, 16).is_err());
        assert!(kernel_exact(1.0, -0.1, &p).is_err());
    }

    #[test]
    fn both_kernel_routes_match_oracle() {
        for &h in &[0.55, 0.75, 0.9] {
            let p = KernelParams::new(h).unwrap();
            for &(t, s) in &[(1.0, 0.5), (1.0, 0.99), (3.0, 0.2), (2.0, 1.5)] {
                let want = kernel_oracle(t, s, h);
                let exact = kernel_exact(t, s, &p).unwrap();
                let quad = kernel_eval(t, s, &p, 16).unwrap();
                assert!(rel(exact, want) < 1e-10, "H={h} ({t},{s}) exact {exact} vs {want}");
                assert!(rel(quad, want) < 1e-8, "H={h} ({t},{s}) quad {quad} vs {want}");
            }
        }
    }

    #[test]
    fn kernel_scaling_in_time() {
        for &h in &[0.55, 0.75, 0.9] {
            let p = KernelParams::new(h).unwrap();
            for &(t, s) in &[(1.0, 0.5), (0.8, 0.3)] {
                let ratio = kernel_eval(2.0 * t, 2.0 * s, &p, 16).unwrap() / kernel_eval(t, s, &p, 16).unwrap();
                assert!(rel(ratio, 2f64.powf(h - 0.5)) < 1e-8);
            }
        }
    }

    #[test]
    fn closed_form_entries_match_quadrature_route() {
        let p = KernelParams::new(0.75).unwrap();
        for &(k, i) in &[(5usize, 2usize), (9, 3), (20, 10), (40, 7)] {
            let a = coeff_entry(k, i, 10, &p).unwrap();
            let b = coeff_entry_quadrature(k, i, 10, &p, QuadMeta::default()).unwrap();
            assert!(rel(a, b) < 1e-6, "({k},{i}) {a} vs {b}");
        }
        assert!(coeff_entry(3, 4, 10, &p).is_err());
        assert!(coeff_entry(3, 0, 10, &p).is_err());
    }

    #[test]
    fn table_accessors_are_consistent() {
        let t = build_table(5, 2.0, 0.7, 2.0, QuadMeta::default()).unwrap();
        assert_eq!(t.n(), 25);
        assert_eq!(t.entries().len(), 25 * 26 / 2);
        for j in 1..t.n() {
            for i in 1..=j {
                assert_eq!(t.small_f(i, j) + t.entry(j, i), t.entry(j + 1, i));
            }
            assert_eq!(t.big_f(j), t.entry(j + 1, j + 1));
        }
        assert_eq!(t.entry(3, 4), 0.0);
        assert!(t.entries().iter().all(|&e| e > 0.0));
    }

    #[test]
    fn table_respects_resource_cap() {
        let spec = TableSpec::new(100, 2.0, 0.75, 1.0, QuadMeta::default()).unwrap();
        assert!(matches!(build_from_spec(&spec, 5000), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn lambda_rescaling_matches_fresh_build() {
        let a = build_table(10, 1.5, 0.8, 1.0, QuadMeta::default()).unwrap();
        let b = build_table(10, 1.5, 0.8, 4.0, QuadMeta::default()).unwrap();
        assert_eq!(a.with_lambda(4.0).unwrap(), b);
    }

    #[test]
    fn standalone_diagonal_matches_table() {
        let t = build_table(7, 2.0, 0.65, 3.0, QuadMeta::default()).unwrap();
        let d = diagonal(7, t.n(), 0.65, 3.0).unwrap();
        for (j, v) in d.iter().enumerate() {
            assert_eq!(v.to_bits(), t.big_f(j).to_bits());
        }
    }
}
