//! Two-point noise, the fractional random walk it drives, and the
//! binomial-to-Poisson distance that justifies the walk.
//!
//! Each `η` takes the value `κ - 1` with probability `κ = e^{-λ/n}` and `κ`
//! otherwise, so it has mean zero and variance `κ(1-κ)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::{validate_lambda, CoefficientTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub n: usize,
    pub lambda: f64,
    pub kappa: f64,
}

impl NoiseSpec {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("noise length n must be positive"));
        }
        validate_lambda(lambda)?;
        Ok(Self {
            n,
            lambda,
            kappa: (-lambda / n as f64).exp(),
        })
    }

    pub fn for_table(table: &CoefficientTable) -> Self {
        Self {
            n: table.n(),
            lambda: table.lambda(),
            kappa: table.kappa(),
        }
    }

    pub fn low(&self) -> f64 {
        self.kappa - 1.0
    }

    pub fn high(&self) -> f64 {
        self.kappa
    }

    /// `κ(1-κ)`.
    pub fn variance(&self) -> f64 {
        self.kappa * (1.0 - self.kappa)
    }
}

/// How the intensity λ is chosen for a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum LambdaMode {
    Explicit(f64),
    /// `λ = n ln 2`, which makes `κ = 1/2` and the walk symmetric.
    FbmSymmetric,
    /// `λ = m ln 2` taken at face value; `κ` is then close to 1.
    FbmLiteral,
}

impl LambdaMode {
    pub fn resolve(&self, m: u64, n: usize) -> f64 {
        match *self {
            LambdaMode::Explicit(l) => l,
            LambdaMode::FbmSymmetric => n as f64 * std::f64::consts::LN_2,
            LambdaMode::FbmLiteral => m as f64 * std::f64::consts::LN_2,
        }
    }
}

impl Default for LambdaMode {
    fn default() -> Self {
        LambdaMode::Explicit(1.0)
    }
}

/// SplitMix64 finalizer applied to `(master, index)`; gives each
/// replication its own stream regardless of scheduling.
pub fn stream_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    values: Vec<f64>,
    spec: NoiseSpec,
    stream_seed: u64,
}

impl NoisePath {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spec(&self) -> NoiseSpec {
        self.spec
    }

    pub fn stream_seed(&self) -> u64 {
        self.stream_seed
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

pub fn sample_eta(spec: NoiseSpec, stream_seed: u64) -> NoisePath {
    let mut rng = rng_for(stream_seed);
    let values = sample_with(&spec, &mut rng);
    NoisePath {
        values,
        spec,
        stream_seed,
    }
}

/// Draw `spec.n` values from an existing generator.
pub fn sample_with<R: Rng>(spec: &NoiseSpec, rng: &mut R) -> Vec<f64> {
    let (lo, hi) = (spec.low(), spec.high());
    (0..spec.n)
        .map(|_| if rng.gen::<f64>() < spec.kappa { lo } else { hi })
        .collect()
}

/// `N_k = Σ_{i<=k} b̃[k][i] η_i` for `k = 0..=n`, with `N_0 = 0`.
pub fn fractional_path(table: &CoefficientTable, eta: &[f64]) -> Result<Vec<f64>> {
    table.ensure_len(eta.len(), "noise")?;
    let mut out = Vec::with_capacity(eta.len() + 1);
    out.push(0.0);
    for k in 1..=table.n() {
        out.push(dot(table.row(k), &eta[..k]));
    }
    Ok(out)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `B_i = η_i - (κ - 1)`, mapping the two admissible values to 0 and 1.
pub fn to_bernoulli(noise: &NoisePath) -> Result<Vec<u8>> {
    bernoulli_from_values(noise.values(), noise.spec().kappa)
}

pub fn bernoulli_from_values(values: &[f64], kappa: f64) -> Result<Vec<u8>> {
    let lo = kappa - 1.0;
    values
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            if e == lo {
                Ok(0)
            } else if e == kappa {
                Ok(1)
            } else {
                Err(Error::CorruptedInput(format!(
                    "noise value {e} at index {} is neither κ-1 = {lo} nor κ = {kappa}",
                    i + 1
                )))
            }
        })
        .collect()
}

const TV_CUTOFF: f64 = 1e-15;

/// Total variation distance between Binomial(n, 1 - e^{-λ/n}) and
/// Poisson(λ). Both mass functions run by their ratio recurrences from the
/// shared value `e^{-λ}` at zero; the sum stops once both are negligible.
pub fn binomial_poisson_tv(n: u64, lambda: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("binomial size n must be positive"));
    }
    validate_lambda(lambda)?;
    let kappa = (-lambda / n as f64).exp();
    let p = -(-lambda / n as f64).exp_m1();
    let odds = p / kappa;
    let mut b = (-lambda).exp();
    let mut q = b;
    let mut total = 0.0;
    let mut k = 0u64;
    loop {
        total += (b - q).abs();
        let past_mode = k as f64 > lambda;
        if k == n {
            break;
        }
        if past_mode && b < TV_CUTOFF && q < TV_CUTOFF {
            return Ok(0.5 * total);
        }
        b *= (n - k) as f64 / (k + 1) as f64 * odds;
        q *= lambda / (k + 1) as f64;
        k += 1;
    }
    // binomial support ends at n; the Poisson tail beyond it counts fully
    loop {
        k += 1;
        q *= lambda / k as f64;
        if q < TV_CUTOFF * 1e-3 && k as f64 > lambda {
            break;
        }
        total += q;
    }
    Ok(0.5 * total)
}

/// `V_H^2 = -Γ(2-2H) cos(πH) / ((2H-1) π H)`, the variance constant of the
/// continuous process at unit time.
pub fn variance_constant(hurst: f64) -> f64 {
    use statrs::function::gamma::gamma;
    use std::f64::consts::PI;
    -gamma(2.0 - 2.0 * hurst) * (PI * hurst).cos() / ((2.0 * hurst - 1.0) * PI * hurst)
}
