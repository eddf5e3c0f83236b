//! Donoho-Johnstone test signals and noise calibration.
//!
//! Closed forms and knot tables follow Donoho & Johnstone (1994), "Ideal
//! spatial adaptation by wavelet shrinkage", Biometrika 81(3), Table 1.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arfima::variance_inflation;
use crate::error::{Error, Result};
use crate::series::{mean, sample_sd, Grid, TimeSeries};

pub const DEFAULT_TARGET_SD: f64 = 7.0;

const KNOTS: [f64; 11] = [
    0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81,
];
const BLOCKS_HEIGHTS: [f64; 11] = [4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2];
const BUMPS_HEIGHTS: [f64; 11] = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];
const BUMPS_WIDTHS: [f64; 11] = [
    0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Bumps,
    Blocks,
    Doppler,
    Heavisine,
}

impl SignalKind {
    pub const ALL: [SignalKind; 4] = [
        SignalKind::Bumps,
        SignalKind::Blocks,
        SignalKind::Doppler,
        SignalKind::Heavisine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SignalKind::Bumps => "bumps",
            SignalKind::Blocks => "blocks",
            SignalKind::Doppler => "doppler",
            SignalKind::Heavisine => "heavisine",
        }
    }

    /// Unscaled closed form at `x` in `[0, 1]`.
    pub fn eval(self, x: f64) -> f64 {
        match self {
            SignalKind::Blocks => KNOTS
                .iter()
                .zip(&BLOCKS_HEIGHTS)
                .map(|(t, h)| h * 0.5 * (1.0 + sgn(x - t)))
                .sum(),
            SignalKind::Bumps => KNOTS
                .iter()
                .zip(&BUMPS_HEIGHTS)
                .zip(&BUMPS_WIDTHS)
                .map(|((t, h), w)| h * (1.0 + ((x - t) / w).abs()).powi(-4))
                .sum(),
            SignalKind::Doppler => {
                (x * (1.0 - x)).max(0.0).sqrt() * (2.0 * PI * 1.05 / (x + 0.05)).sin()
            }
            SignalKind::Heavisine => 4.0 * (4.0 * PI * x).sin() - sgn(x - 0.3) - sgn(0.72 - x),
        }
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SignalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bumps" => Ok(SignalKind::Bumps),
            "blocks" => Ok(SignalKind::Blocks),
            "doppler" => Ok(SignalKind::Doppler),
            "heavisine" => Ok(SignalKind::Heavisine),
            _ => Err(Error::Invalid(format!(
                "unknown signal {s:?} (expected bumps, blocks, doppler or heavisine)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSignal {
    pub kind: SignalKind,
    pub samples: TimeSeries,
    pub target_sd: f64,
}

impl TestSignal {
    pub fn values(&self) -> &[f64] {
        self.samples.values()
    }
}

/// Evaluates `kind` on `x_i = i / n_plus_1`, `i = 0..n_plus_1`, and rescales
/// about the sample mean so that the sample standard deviation is `target_sd`.
pub fn generate(kind: SignalKind, n_plus_1: usize, target_sd: f64) -> Result<TestSignal> {
    if n_plus_1 < 2 {
        return Err(Error::length(n_plus_1, "test signal needs at least 2 points"));
    }
    if !(target_sd.is_finite() && target_sd > 0.0) {
        return Err(Error::domain("target_sd", target_sd, "(0, inf)"));
    }
    let step = 1.0 / n_plus_1 as f64;
    let raw: Vec<f64> = (0..n_plus_1).map(|i| kind.eval(i as f64 * step)).collect();
    let values = rescale(&raw, target_sd)?;
    Ok(TestSignal {
        kind,
        samples: TimeSeries::new(values).with_grid(Grid { start: 0.0, step }),
        target_sd,
    })
}

/// Affine map about the mean giving sample sd `target_sd`.
pub fn rescale(values: &[f64], target_sd: f64) -> Result<Vec<f64>> {
    let sd = sample_sd(values);
    if sd == 0.0 {
        return Err(Error::Constant);
    }
    let m = mean(values);
    let k = target_sd / sd;
    Ok(values.iter().map(|v| m + (v - m) * k).collect())
}

/// Innovation sd giving `sd(signal) / sd(e) = snr` for ARFIMA(0, d, 0) noise:
/// `σ_a = sd(f) / (snr √V(d))`, `V(d) = Γ(1-2d)/Γ(1-d)²`.
pub fn calibrate_sigma_a(signal: &[f64], snr: f64, d: f64) -> Result<f64> {
    if !(snr.is_finite() && snr > 0.0) {
        return Err(Error::domain("snr", snr, "(0, inf)"));
    }
    let v = variance_inflation(d)?;
    Ok(sample_sd(signal) / (snr * v.sqrt()))
}
