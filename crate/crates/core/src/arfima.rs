//! Fractionally integrated noise, ARFIMA(0, d, 0).
//!
//! The process satisfies `(1 - B)^d e_t = a_t` with iid Gaussian innovations
//! `a_t ~ N(0, sigma_a^2)`. Simulation is exact: samples are drawn from the
//! stationary Gaussian law with the closed-form autocovariance, either by the
//! Durbin-Levinson recursion or, for long series, by circulant embedding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::special::ln_gamma_signed;

/// Series longer than this are simulated by circulant embedding under
/// [`SimulationMethod::Auto`].
pub const DURBIN_LEVINSON_MAX_LEN: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArfimaSpec {
    pub d: f64,
    pub sigma_a: f64,
    pub n: usize,
    pub seed: u64,
}

impl ArfimaSpec {
    /// Validates `-0.5 < d < 0.5`, `sigma_a > 0` and `n >= 1`.
    ///
    /// The long-memory regime is `0 < d < 0.5`; non-positive `d` is admitted
    /// for white noise and antipersistent (differenced) processes.
    pub fn new(d: f64, sigma_a: f64, n: usize, seed: u64) -> Result<Self> {
        check_stationary(d)?;
        if !(sigma_a.is_finite() && sigma_a > 0.0) {
            return Err(Error::domain("sigma_a", sigma_a, "(0, inf)"));
        }
        if n == 0 {
            return Err(Error::length(0, "series length must be at least 1"));
        }
        Ok(ArfimaSpec {
            d,
            sigma_a,
            n,
            seed,
        })
    }

    pub fn autocovariance(&self, maxlag: usize) -> Result<Vec<f64>> {
        autocovariance(self.d, self.sigma_a, maxlag)
    }
}

fn check_stationary(d: f64) -> Result<()> {
    if d.is_finite() && d > -0.5 && d < 0.5 {
        Ok(())
    } else {
        Err(Error::domain("d", d, "(-0.5, 0.5)"))
    }
}

/// Coefficients `b_0..=b_count` of the expansion `(1 - B)^d = sum_j b_j B^j`.
///
/// Uses `b_0 = 1`, `b_j = b_{j-1} (j - 1 - d) / j`, which equals
/// `Γ(j - d) / (Γ(j + 1) Γ(-d))` without evaluating gamma functions.
pub fn frac_diff_coeffs(d: f64, count: usize) -> Result<Vec<f64>> {
    if !d.is_finite() {
        return Err(Error::domain("d", d, "finite"));
    }
    let mut b = Vec::with_capacity(count + 1);
    b.push(1.0);
    for j in 1..=count {
        let jf = j as f64;
        b.push(b[j - 1] * (jf - 1.0 - d) / jf);
    }
    Ok(b)
}

/// Stationary variance of ARFIMA(0, d, 0) relative to the innovation
/// variance: `Γ(1 - 2d) / Γ(1 - d)^2`.
pub fn variance_inflation(d: f64) -> Result<f64> {
    check_stationary(d)?;
    if d == 0.0 {
        return Ok(1.0);
    }
    let (a, _) = ln_gamma_signed(1.0 - 2.0 * d);
    let (b, _) = ln_gamma_signed(1.0 - d);
    Ok((a - 2.0 * b).exp())
}

/// Autocovariances `γ(0..=maxlag)`.
///
/// `γ(0) = σ_a² Γ(1-2d)/Γ(1-d)²` and `γ(k) = γ(k-1) (k - 1 + d)/(k - d)`,
/// the ratio form of `σ_a² Γ(1-2d) Γ(k+d) / (Γ(d) Γ(1-d) Γ(k+1-d))`. The
/// recurrence stays valid at `d = 0` where the closed form has a removable
/// singularity.
pub fn autocovariance(d: f64, sigma_a: f64, maxlag: usize) -> Result<Vec<f64>> {
    check_stationary(d)?;
    if !(sigma_a.is_finite() && sigma_a > 0.0) {
        return Err(Error::domain("sigma_a", sigma_a, "(0, inf)"));
    }
    let mut g = Vec::with_capacity(maxlag + 1);
    g.push(sigma_a * sigma_a * variance_inflation(d)?);
    for k in 1..=maxlag {
        let kf = k as f64;
        g.push(g[k - 1] * (kf - 1.0 + d) / (kf - d));
    }
    Ok(g)
}

/// Theoretical autocorrelations `ρ(0..=maxlag)`; `ρ(1) = d / (1 - d)`.
pub fn theoretical_acf(d: f64, maxlag: usize) -> Result<Vec<f64>> {
    let g = autocovariance(d, 1.0, maxlag)?;
    Ok(g.iter().map(|v| v / g[0]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SimulationMethod {
    /// Durbin-Levinson up to [`DURBIN_LEVINSON_MAX_LEN`], circulant embedding beyond.
    #[default]
    Auto,
    DurbinLevinson,
    CirculantEmbedding,
}

/// Draws `e_1..e_n` from the stationary ARFIMA(0, d, 0) law.
///
/// Deterministic in `spec.seed`.
pub fn simulate(spec: &ArfimaSpec) -> Result<TimeSeries> {
    simulate_with(spec, SimulationMethod::Auto)
}

pub fn simulate_with(spec: &ArfimaSpec, method: SimulationMethod) -> Result<TimeSeries> {
    let spec = ArfimaSpec::new(spec.d, spec.sigma_a, spec.n, spec.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let method = match method {
        SimulationMethod::Auto if spec.n > DURBIN_LEVINSON_MAX_LEN => {
            SimulationMethod::CirculantEmbedding
        }
        SimulationMethod::Auto => SimulationMethod::DurbinLevinson,
        m => m,
    };
    let values = match method {
        SimulationMethod::CirculantEmbedding => match circulant_eigenvalues(&spec)? {
            Some(eig) => circulant_sample(&eig, spec.n, &mut rng),
            None => durbin_levinson(&spec.autocovariance(spec.n - 1)?, &mut rng),
        },
        _ => durbin_levinson(&spec.autocovariance(spec.n - 1)?, &mut rng),
    };
    Ok(TimeSeries::new(values))
}

fn durbin_levinson(acvf: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = acvf.len();
    let z: Vec<f64> = StandardNormal.sample_iter(&mut *rng).take(n).collect();
    let mut x = vec![0.0; n];
    // phi[j - 1] holds the order-t prediction coefficient for lag j
    let mut phi = vec![0.0; n];
    let mut prev = vec![0.0; n];
    let mut v = acvf[0];
    x[0] = v.sqrt() * z[0];
    for t in 1..n {
        let dot: f64 = phi[..t - 1]
            .iter()
            .zip(acvf[1..t].iter().rev())
            .map(|(p, g)| p * g)
            .sum();
        let k = (acvf[t] - dot) / v;
        prev[..t - 1].copy_from_slice(&phi[..t - 1]);
        for j in 0..t - 1 {
            phi[j] = prev[j] - k * prev[t - 2 - j];
        }
        phi[t - 1] = k;
        v *= 1.0 - k * k;
        let pred: f64 = phi[..t]
            .iter()
            .zip(x[..t].iter().rev())
            .map(|(p, xv)| p * xv)
            .sum();
        x[t] = pred + v.max(0.0).sqrt() * z[t];
    }
    x
}

/// Eigenvalues of the minimal power-of-two circulant embedding of the
/// covariance matrix, or `None` when the embedding is not nonnegative definite.
fn circulant_eigenvalues(spec: &ArfimaSpec) -> Result<Option<Vec<f64>>> {
    let m = (2 * spec.n.saturating_sub(1)).next_power_of_two().max(2);
    let half = m / 2;
    let g = spec.autocovariance(half)?;
    let mut c: Vec<Complex<f64>> = (0..m)
        .map(|k| Complex::new(g[k.min(m - k)], 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut c);
    let max = c.iter().map(|v| v.re).fold(0.0, f64::max);
    if c.iter().any(|v| v.re < -1e-10 * max) {
        return Ok(None);
    }
    Ok(Some(c.iter().map(|v| v.re.max(0.0)).collect()))
}

fn circulant_sample(eig: &[f64], n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let m = eig.len();
    let scale = 1.0 / m as f64;
    let mut w: Vec<Complex<f64>> = eig
        .iter()
        .map(|&lam| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex::new(re, im) * (lam * scale).sqrt()
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut w);
    w[..n].iter().map(|v| v.re).collect()
}

/// Sample autocorrelations at lags `0..=maxlag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfSeries {
    pub values: Vec<f64>,
}

impl AcfSeries {
    pub fn maxlag(&self) -> usize {
        self.values.len() - 1
    }

    pub fn lag(&self, k: usize) -> f64 {
        self.values[k]
    }
}

/// `ρ̂(k) = Σ_t (x_t - x̄)(x_{t+k} - x̄) / Σ_t (x_t - x̄)²`.
pub fn sample_acf(series: &[f64], maxlag: usize) -> Result<AcfSeries> {
    let n = series.len();
    if n < 2 || maxlag >= n {
        return Err(Error::length(
            n,
            format!("sample ACF needs at least 2 points and more than maxlag = {maxlag}"),
        ));
    }
    crate::error::check_finite(series)?;
    let mean = crate::series::mean(series);
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let denom: f64 = centered.iter().map(|x| x * x).sum();
    if denom == 0.0 {
        return Err(Error::Constant);
    }
    let values = (0..=maxlag)
        .map(|k| {
            if k == 0 {
                return 1.0;
            }
            let num: f64 = centered[..n - k]
                .iter()
                .zip(&centered[k..])
                .map(|(a, b)| a * b)
                .sum();
            num / denom
        })
        .collect();
    Ok(AcfSeries { values })
}
