//! Wavelet shrinkage estimation of a regression signal observed under
//! long-memory ARFIMA(0, d, 0) noise.
//!
//! The main estimator differences the observations, applies Bayesian
//! shrinkage with a point-mass / logistic mixture prior to the wavelet
//! coefficients of the differences, inverts the transform and integrates the
//! result back to the original scale ([`pipeline::Method::LogDiff`]). The
//! crate also provides the baselines, an exact ARFIMA noise simulator, the
//! Donoho-Johnstone test signals and a reproducible Monte Carlo harness.

pub mod arfima;
pub mod bench;
pub mod error;
pub mod pipeline;
pub mod series;
pub mod shrinkage;
pub mod special;
pub mod testfuncs;
pub mod wavelet;

pub use arfima::{sample_acf, simulate, AcfSeries, ArfimaSpec};
pub use bench::{BenchmarkReport, BenchmarkSpec};
pub use error::{Error, Result};
pub use pipeline::{denoise_direct, denoise_logdiff, Denoiser, EstimatorOutput, Method};
pub use series::TimeSeries;
pub use shrinkage::{Rule, ShrinkageConfig, SigmaPolicy};
pub use testfuncs::{SignalKind, TestSignal};
pub use wavelet::{dwt, idwt, WaveletDecomposition, WaveletFilter};
