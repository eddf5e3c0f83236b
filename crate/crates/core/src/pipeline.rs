//! End-to-end estimators of the regression signal `f` in `y_i = f(x_i) + e_i`.
//!
//! [`Method::LogDiff`] shrinks the wavelet coefficients of the first
//! differences `z_i = y_{i+1} - y_i` and integrates the estimate back, anchored
//! at the mean of the first [`ANCHOR_LEN`] observations. The two baselines
//! shrink the coefficients of `y` itself.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::series::{is_power_of_two, TimeSeries};
use crate::shrinkage::{apply_rule, Rule, ShrinkageConfig};
use crate::wavelet::{dwt, idwt, WaveletFilter};

/// Number of leading observations averaged to anchor the integrated estimate.
pub const ANCHOR_LEN: usize = 20;

/// Default coarsest resolution level: `2^5 = 32` scaling coefficients are
/// kept. Below it the per-level MAD sees mostly signal, not noise.
pub const DEFAULT_COARSEST_LEVEL: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Soft thresholding of the data's coefficients.
    Universal,
    /// Logistic-prior shrinkage of the data's coefficients.
    Logistic,
    /// Logistic-prior shrinkage of the differenced data, then integration.
    LogDiff,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Universal, Method::Logistic, Method::LogDiff];

    pub fn name(self) -> &'static str {
        match self {
            Method::Universal => "universal",
            Method::Logistic => "logistic",
            Method::LogDiff => "logdiff",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "universal" => Ok(Method::Universal),
            "logistic" => Ok(Method::Logistic),
            "logdiff" => Ok(Method::LogDiff),
            _ => Err(Error::Invalid(format!(
                "unknown method {s:?} (expected universal, logistic or logdiff)"
            ))),
        }
    }
}

/// Observations `y_1..y_{n+1}` with `n = 2^J`, as required by Log-Diff.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSample {
    y: Vec<f64>,
}

impl RegressionSample {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        check_finite(&y)?;
        let len = y.len();
        if len < ANCHOR_LEN + 1 || !is_power_of_two(len - 1) {
            return Err(Error::length(
                len,
                format!("expected 2^J + 1 observations with at least {} points", ANCHOR_LEN + 1),
            ));
        }
        Ok(RegressionSample { y })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Number of differences, `2^J`.
    pub fn n(&self) -> usize {
        self.y.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOutput {
    pub f_hat: TimeSeries,
    pub method: Method,
    pub config: ShrinkageConfig,
}

/// `z_i = y_{i+1} - y_i`.
pub fn difference(y: &[f64]) -> Result<Vec<f64>> {
    if y.len() < 2 {
        return Err(Error::length(y.len(), "differencing needs at least 2 values"));
    }
    Ok(y.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Cumulative sum anchored at `f1`: the result has one more entry than `g_hat`.
pub fn integrate(g_hat: &[f64], f1: f64) -> Result<Vec<f64>> {
    check_finite(g_hat)?;
    if !f1.is_finite() {
        return Err(Error::domain("f1", f1, "finite"));
    }
    let mut out = Vec::with_capacity(g_hat.len() + 1);
    let mut acc = f1;
    out.push(acc);
    for g in g_hat {
        acc += g;
        out.push(acc);
    }
    Ok(out)
}

/// Mean of the first [`ANCHOR_LEN`] observations.
pub fn initial_value(y: &[f64]) -> Result<f64> {
    if y.len() < ANCHOR_LEN {
        return Err(Error::length(
            y.len(),
            format!("initial value needs at least {ANCHOR_LEN} observations"),
        ));
    }
    Ok(y[..ANCHOR_LEN].iter().sum::<f64>() / ANCHOR_LEN as f64)
}

/// Wavelet basis, shrinkage settings and decomposition depth shared by all
/// estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct Denoiser {
    pub filter: WaveletFilter,
    pub config: ShrinkageConfig,
    /// Coarsest resolution level `j0`: the transform stops once the scaling
    /// block has `2^j0` coefficients, and those are never shrunk. Zero gives
    /// the full-depth transform. Short inputs always keep at least one
    /// detail level.
    pub coarsest_level: usize,
}

impl Default for Denoiser {
    fn default() -> Self {
        Denoiser {
            filter: WaveletFilter::default(),
            config: ShrinkageConfig::default(),
            coarsest_level: DEFAULT_COARSEST_LEVEL,
        }
    }
}

impl Denoiser {
    pub fn new(filter: WaveletFilter, config: ShrinkageConfig) -> Self {
        Denoiser {
            filter,
            config,
            coarsest_level: DEFAULT_COARSEST_LEVEL,
        }
    }

    /// Number of decomposition levels used for a length-`n` input.
    pub fn levels_for(&self, n: usize) -> usize {
        let max = n.trailing_zeros() as usize;
        max.saturating_sub(self.coarsest_level).max(1)
    }

    pub fn with_coarsest_level(self, coarsest_level: usize) -> Self {
        Denoiser {
            coarsest_level,
            ..self
        }
    }

    /// Runs `method`. `y` must have `2^J + 1` entries for Log-Diff and `2^J`
    /// for the direct methods. The configured rule is overridden by the one
    /// the method implies.
    pub fn estimate(&self, method: Method, y: &[f64]) -> Result<EstimatorOutput> {
        match method {
            Method::LogDiff => self.logdiff(y),
            Method::Logistic => self.direct(y, Rule::Logistic),
            Method::Universal => self.direct(y, Rule::Universal),
        }
    }

    fn shrink(&self, x: &[f64], config: &ShrinkageConfig) -> Result<Vec<f64>> {
        let levels = self.levels_for(x.len());
        let dec = dwt(x, &self.filter, levels)?;
        idwt(&apply_rule(&dec, config, x.len())?)
    }

    pub fn logdiff(&self, y: &[f64]) -> Result<EstimatorOutput> {
        let sample = RegressionSample::new(y.to_vec())?;
        let config = self.config.with_rule(Rule::Logistic);
        let z = difference(sample.y())?;
        let g_hat = self.shrink(&z, &config)?;
        let f_hat = integrate(&g_hat, initial_value(sample.y())?)?;
        Ok(EstimatorOutput {
            f_hat: TimeSeries::new(f_hat),
            method: Method::LogDiff,
            config,
        })
    }

    pub fn direct(&self, y: &[f64], rule: Rule) -> Result<EstimatorOutput> {
        check_finite(y)?;
        if !is_power_of_two(y.len()) || y.len() < 2 {
            return Err(Error::NotPowerOfTwo { len: y.len() });
        }
        let config = self.config.with_rule(rule);
        let f_hat = self.shrink(y, &config)?;
        Ok(EstimatorOutput {
            f_hat: TimeSeries::new(f_hat),
            method: match rule {
                Rule::Logistic => Method::Logistic,
                Rule::Universal => Method::Universal,
            },
            config,
        })
    }
}

/// Log-Diff estimate of `f` at all `2^J + 1` design points, with the default
/// coarse cutoff.
pub fn denoise_logdiff(
    y: &[f64],
    filter: &WaveletFilter,
    config: &ShrinkageConfig,
) -> Result<EstimatorOutput> {
    Denoiser::new(filter.clone(), *config).logdiff(y)
}

/// Shrinks the coefficients of `y` (length `2^J`) with `config.rule`.
pub fn denoise_direct(
    y: &[f64],
    filter: &WaveletFilter,
    config: &ShrinkageConfig,
) -> Result<EstimatorOutput> {
    Denoiser::new(filter.clone(), *config).direct(y, config.rule)
}
