//! Coefficient-wise shrinkage rules for wavelet detail coefficients.
//!
//! Two rules are provided: the Bayesian posterior mean under a prior that
//! mixes a point mass at zero (weight `alpha`) with a zero-centred logistic
//! density of scale `tau`, and level-wise soft thresholding at the universal
//! threshold `σ̂_j √(2 ln n)`. Scaling coefficients are never modified.

mod quadrature;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use quadrature::{gauss_legendre, gaussian_expectation, GaussHermite};

use crate::error::{Error, Result};
use crate::special::ln_normal_tail;
use crate::wavelet::WaveletDecomposition;

/// Normal-consistency constant for the median absolute deviation.
pub const MAD_CONSTANT: f64 = 0.6745;

pub const DEFAULT_ALPHA: f64 = 0.8;
pub const DEFAULT_TAU: f64 = 5.0;
pub const DEFAULT_QUAD_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Logistic,
    Universal,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Logistic => "logistic",
            Rule::Universal => "universal",
        })
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "logistic" => Ok(Rule::Logistic),
            "universal" => Ok(Rule::Universal),
            _ => Err(Error::Invalid(format!(
                "unknown rule {s:?} (expected logistic or universal)"
            ))),
        }
    }
}

/// How the noise scale `σ̂_j` of each detail level is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaPolicy {
    /// MAD of each level's own coefficients.
    #[default]
    PerLevelMad,
    /// MAD of the finest level, used for every level.
    FinestLevelMad,
    /// A known noise scale. Zero disables shrinkage.
    Fixed(f64),
}

impl fmt::Display for SigmaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaPolicy::PerLevelMad => f.write_str("per-level-mad"),
            SigmaPolicy::FinestLevelMad => f.write_str("finest-level-mad"),
            SigmaPolicy::Fixed(s) => write!(f, "fixed:{s}"),
        }
    }
}

impl FromStr for SigmaPolicy {
    type Err = Error;

    /// `per-level-mad`, `finest-level-mad` or `fixed:<sigma>`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "per-level-mad" => return Ok(SigmaPolicy::PerLevelMad),
            "finest-level-mad" => return Ok(SigmaPolicy::FinestLevelMad),
            _ => {}
        }
        let value = t
            .strip_prefix("fixed:")
            .or_else(|| t.strip_prefix("fixed(").and_then(|r| r.strip_suffix(')')))
            .ok_or_else(|| {
                Error::Invalid(format!(
                    "unknown sigma policy {s:?} (expected per-level-mad, finest-level-mad or fixed:<sigma>)"
                ))
            })?;
        let sigma: f64 = value
            .parse()
            .map_err(|_| Error::Invalid(format!("invalid fixed sigma {value:?}")))?;
        Ok(SigmaPolicy::Fixed(sigma))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShrinkageConfig {
    pub rule: Rule,
    pub alpha: f64,
    pub tau: f64,
    pub quad_order: usize,
    pub sigma_policy: SigmaPolicy,
}

impl Default for ShrinkageConfig {
    fn default() -> Self {
        ShrinkageConfig {
            rule: Rule::Logistic,
            alpha: DEFAULT_ALPHA,
            tau: DEFAULT_TAU,
            quad_order: DEFAULT_QUAD_ORDER,
            sigma_policy: SigmaPolicy::PerLevelMad,
        }
    }
}

impl ShrinkageConfig {
    pub fn with_rule(self, rule: Rule) -> Self {
        ShrinkageConfig { rule, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        check_hyper(self.alpha, self.tau)?;
        if self.quad_order < 16
            || !self.quad_order.is_multiple_of(2)
            || self.quad_order > quadrature::MAX_ORDER
        {
            return Err(Error::domain(
                "quad_order",
                self.quad_order as f64,
                "even integers in 16..=192",
            ));
        }
        if let SigmaPolicy::Fixed(s) = self.sigma_policy {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::domain("sigma", s, "[0, inf)"));
            }
        }
        Ok(())
    }
}

fn check_hyper(alpha: f64, tau: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain("alpha", alpha, "(0, 1)"));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::domain("tau", tau, "(0, inf)"));
    }
    Ok(())
}

/// `median(|c - median(c)|) / 0.6745`.
pub fn estimate_sigma(level_coeffs: &[f64]) -> Result<f64> {
    if level_coeffs.is_empty() {
        return Err(Error::length(0, "cannot estimate noise scale of an empty block"));
    }
    crate::error::check_finite(level_coeffs)?;
    let mut c = level_coeffs.to_vec();
    let med = median_in_place(&mut c);
    for v in c.iter_mut() {
        *v = (*v - med).abs();
    }
    Ok(median_in_place(&mut c) / MAD_CONSTANT)
}

fn median_in_place(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn soft_threshold(w: f64, lambda: f64) -> f64 {
    w.signum() * (w.abs() - lambda).max(0.0)
}

/// Posterior-mean shrinkage under the point-mass / logistic mixture prior.
#[derive(Debug, Clone)]
pub struct LogisticRule {
    alpha: f64,
    tau: f64,
    quad: GaussHermite,
    ln_weights: Vec<f64>,
}

impl LogisticRule {
    pub fn new(alpha: f64, tau: f64, quad_order: usize) -> Result<Self> {
        check_hyper(alpha, tau)?;
        Ok(Self::with_quadrature(alpha, tau, GaussHermite::new(quad_order)?))
    }

    fn with_quadrature(alpha: f64, tau: f64, quad: GaussHermite) -> Self {
        let ln_weights = quad.weights().iter().map(|w| w.ln()).collect();
        LogisticRule {
            alpha,
            tau,
            quad,
            ln_weights,
        }
    }

    /// `ln h(θ; τ)` for the zero-symmetric logistic density.
    fn ln_logistic_density(&self, theta: f64) -> f64 {
        let a = theta.abs() / self.tau;
        -a - self.tau.ln() - 2.0 * (-a).exp().ln_1p()
    }

    /// `δ(w) = (1-α) E[(σU + w) h(σU + w)] / ((α/σ) φ(w/σ) + (1-α) E[h(σU + w)])`
    /// with `U ~ N(0, 1)`.
    ///
    /// The expectations use Gauss-Hermite nodes when `τ >= σ`. A narrower
    /// prior is a spike between the nodes, so then the slab integrals are
    /// taken over `θ` directly: Gauss-Legendre panels on `|θ| <= 40τ` and
    /// closed-form Gaussian tails beyond, where `h` is exponential to
    /// double precision.
    ///
    /// Every term is assembled in log space relative to the largest one, so
    /// the ratio stays finite when `φ(w/σ)` and `h` underflow.
    pub fn shrink(&self, w: f64, sigma: f64) -> Result<f64> {
        if !w.is_finite() {
            return Err(Error::domain("w", w, "finite"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::domain("sigma", sigma, "(0, inf)"));
        }
        if w == 0.0 {
            return Ok(0.0);
        }
        let x = w.abs();
        let z = x / sigma;
        let ln_point = self.alpha.ln() - sigma.ln() - 0.5 * LN_2PI - 0.5 * z * z;
        let ln_slab = (1.0 - self.alpha).ln();

        // (log weight, θ) pairs of the slab integrals
        let terms = if self.tau >= sigma {
            self.slab_terms_hermite(x, sigma, ln_slab)
        } else {
            self.slab_terms_direct(x, sigma, ln_slab)
        };
        let max = terms.iter().fold(ln_point, |m, &(t, _)| m.max(t));
        let mut num = 0.0;
        let mut den = (ln_point - max).exp();
        for &(t, theta) in &terms {
            let e = (t - max).exp();
            num += theta * e;
            den += e;
        }
        // the posterior mean never exceeds |w|; min() absorbs rounding
        Ok(w.signum() * (num / den).min(x))
    }

    fn slab_terms_hermite(&self, x: f64, sigma: f64, ln_slab: f64) -> Vec<(f64, f64)> {
        self.quad
            .nodes()
            .iter()
            .zip(&self.ln_weights)
            .map(|(&u, &lw)| {
                let theta = sigma * u + x;
                (lw + ln_slab + self.ln_logistic_density(theta), theta)
            })
            .collect()
    }

    fn slab_terms_direct(&self, x: f64, sigma: f64, ln_slab: f64) -> Vec<(f64, f64)> {
        let tau = self.tau;
        let edge = TAIL_START * tau;
        let width = 2.0 * edge / PANELS as f64;
        let (nodes, weights) = legendre_rule();
        let ln_norm = -sigma.ln() - 0.5 * LN_2PI;
        let mut terms = Vec::with_capacity(PANELS * nodes.len() + 2);
        for p in 0..PANELS {
            let mid = -edge + (p as f64 + 0.5) * width;
            for (&t, &gw) in nodes.iter().zip(weights) {
                let theta = mid + 0.5 * width * t;
                let r = (theta - x) / sigma;
                let ln = (0.5 * width * gw).ln()
                    + ln_slab
                    + self.ln_logistic_density(theta)
                    + ln_norm
                    - 0.5 * r * r;
                terms.push((ln, theta));
            }
        }
        // ∫_edge^∞ e^{-θ/τ}/τ N(θ; ±x, σ²) dθ: a Gaussian tilted to mean μ
        let tilt = sigma * sigma / tau;
        for sign in [1.0, -1.0] {
            let mu = sign * x - tilt;
            let zt = (edge - mu) / sigma;
            let ln_q = ln_normal_tail(zt);
            let ln_mass = ln_slab - tau.ln() + 0.5 * tilt / tau - sign * x / tau + ln_q;
            let mills = (-0.5 * zt * zt - 0.5 * LN_2PI - ln_q).exp();
            terms.push((ln_mass, sign * (mu + sigma * mills)));
        }
        terms
    }
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// The direct slab integral switches to closed-form tails at `|θ| = 40τ`,
/// where `h` differs from `e^{-|θ|/τ}/τ` by a factor `1 + O(e^{-40})`.
const TAIL_START: f64 = 40.0;
const PANELS: usize = 20;

fn legendre_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| quadrature::gauss_legendre(16))
}

fn default_rule() -> &'static GaussHermite {
    static QUAD: OnceLock<GaussHermite> = OnceLock::new();
    QUAD.get_or_init(|| GaussHermite::new(DEFAULT_QUAD_ORDER).expect("valid order"))
}

/// Single-coefficient logistic shrinkage with the default quadrature order.
pub fn logistic_shrink(w: f64, sigma: f64, alpha: f64, tau: f64) -> Result<f64> {
    check_hyper(alpha, tau)?;
    LogisticRule::with_quadrature(alpha, tau, default_rule().clone()).shrink(w, sigma)
}

/// Noise scale for each detail level (coarsest first); `None` means the
/// level is passed through unshrunk.
///
/// A zero per-level estimate falls back to the finest-level estimate; if that
/// is zero too the level is left alone.
pub fn level_sigmas(decomp: &WaveletDecomposition, policy: SigmaPolicy) -> Result<Vec<Option<f64>>> {
    let finest = match decomp.details().last() {
        Some((_, block)) => estimate_sigma(block)?,
        None => return Ok(Vec::new()),
    };
    let positive = |s: f64| (s > 0.0).then_some(s);
    decomp
        .details()
        .map(|(_, block)| {
            Ok(match policy {
                SigmaPolicy::PerLevelMad => positive(estimate_sigma(block)?).or(positive(finest)),
                SigmaPolicy::FinestLevelMad => positive(finest),
                SigmaPolicy::Fixed(s) => positive(s),
            })
        })
        .collect()
}

/// Level-dependent soft thresholding at `λ_j = σ̂_j √(2 ln n)`.
pub fn universal_soft(
    decomp: &WaveletDecomposition,
    n: usize,
    sigma_policy: SigmaPolicy,
) -> Result<WaveletDecomposition> {
    if n < 2 {
        return Err(Error::length(n, "universal threshold needs n >= 2"));
    }
    let factor = (2.0 * (n as f64).ln()).sqrt();
    let sigmas = level_sigmas(decomp, sigma_policy)?;
    let mut out = decomp.clone();
    for ((_, block), sigma) in out.details_mut().zip(sigmas) {
        if let Some(s) = sigma {
            let lambda = s * factor;
            for v in block.iter_mut() {
                *v = soft_threshold(*v, lambda);
            }
        }
    }
    Ok(out)
}

/// Applies the configured rule to every detail coefficient; the scaling block
/// is copied unchanged. `n` is the sample size entering the universal
/// threshold.
pub fn apply_rule(
    decomp: &WaveletDecomposition,
    config: &ShrinkageConfig,
    n: usize,
) -> Result<WaveletDecomposition> {
    config.validate()?;
    match config.rule {
        Rule::Universal => universal_soft(decomp, n, config.sigma_policy),
        Rule::Logistic => {
            let rule = LogisticRule::new(config.alpha, config.tau, config.quad_order)?;
            let sigmas = level_sigmas(decomp, config.sigma_policy)?;
            let mut out = decomp.clone();
            for ((_, block), sigma) in out.details_mut().zip(sigmas) {
                if let Some(s) = sigma {
                    for v in block.iter_mut() {
                        *v = rule.shrink(*v, s)?;
                    }
                }
            }
            Ok(out)
        }
    }
}
