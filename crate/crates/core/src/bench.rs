//! Monte Carlo comparison of the estimators on the test signals.
//!
//! For every scenario `(signal, n, snr)` and replication `r` a child seed is
//! derived from the master seed, one noisy sample of `n + 1` points is drawn,
//! and every requested method is run on that same sample: Log-Diff on all
//! `n + 1` points, the direct methods on points `2..=n+1`. Each method's MSE
//! is taken over those same `n` points. Results do not depend on thread count
//! or scheduling.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arfima::{simulate, ArfimaSpec};
use crate::error::{Error, Result};
use crate::pipeline::{Denoiser, Method, DEFAULT_COARSEST_LEVEL};
use crate::series::is_power_of_two;
use crate::shrinkage::ShrinkageConfig;
use crate::testfuncs::{calibrate_sigma_a, generate, SignalKind, DEFAULT_TARGET_SD};
use crate::wavelet::WaveletFilter;

/// Description of the child-seed derivation, recorded in every report.
pub const SEED_DERIVATION: &str = "h = splitmix64(master_seed); for v in [signal_id, n, \
     snr.to_bits(), replication]: h = splitmix64(h ^ v); signal_id: bumps=0 blocks=1 \
     doppler=2 heavisine=3";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub signals: Vec<SignalKind>,
    pub n_values: Vec<usize>,
    pub snr_values: Vec<f64>,
    pub d: f64,
    pub replications: usize,
    pub master_seed: u64,
    pub methods: Vec<Method>,
    pub config: ShrinkageConfig,
    pub filter: WaveletFilter,
    pub target_sd: f64,
    pub coarsest_level: usize,
}

impl Default for BenchmarkSpec {
    /// The full simulation grid: four signals, `n ∈ {512, 2048}`,
    /// `snr ∈ {3, 9}`, `d = 0.4`, 200 replications.
    fn default() -> Self {
        BenchmarkSpec {
            signals: SignalKind::ALL.to_vec(),
            n_values: vec![512, 2048],
            snr_values: vec![3.0, 9.0],
            d: 0.4,
            replications: 200,
            master_seed: 2025,
            methods: Method::ALL.to_vec(),
            config: ShrinkageConfig::default(),
            filter: WaveletFilter::default(),
            target_sd: DEFAULT_TARGET_SD,
            coarsest_level: DEFAULT_COARSEST_LEVEL,
        }
    }
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::Invalid(format!(
                "replications must satisfy replications >= 2, got {}",
                self.replications
            )));
        }
        if self.signals.is_empty() || self.n_values.is_empty() || self.snr_values.is_empty() {
            return Err(Error::Invalid("benchmark grid is empty".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Invalid("no methods selected".into()));
        }
        for &n in &self.n_values {
            if !is_power_of_two(n) || n < 32 {
                return Err(Error::Invalid(format!(
                    "n = {n} must be a power of two >= 32"
                )));
            }
        }
        for &snr in &self.snr_values {
            if !(snr.is_finite() && snr > 0.0) {
                return Err(Error::domain("snr", snr, "(0, inf)"));
            }
        }
        if !(self.d > -0.5 && self.d < 0.5) {
            return Err(Error::domain("d", self.d, "(-0.5, 0.5)"));
        }
        if !(self.target_sd.is_finite() && self.target_sd > 0.0) {
            return Err(Error::domain("target_sd", self.target_sd, "(0, inf)"));
        }
        self.config.validate()
    }

    pub fn scenarios(&self) -> Vec<Scenario> {
        let mut out = Vec::new();
        for &signal in &self.signals {
            for &n in &self.n_values {
                for &snr in &self.snr_values {
                    out.push(Scenario { signal, n, snr });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub signal: SignalKind,
    pub n: usize,
    pub snr: f64,
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// See [`SEED_DERIVATION`].
pub fn child_seed(master_seed: u64, scenario: &Scenario, replication: usize) -> u64 {
    let signal_id = match scenario.signal {
        SignalKind::Bumps => 0u64,
        SignalKind::Blocks => 1,
        SignalKind::Doppler => 2,
        SignalKind::Heavisine => 3,
    };
    [
        signal_id,
        scenario.n as u64,
        scenario.snr.to_bits(),
        replication as u64,
    ]
    .into_iter()
    .fold(splitmix64(master_seed), |h, v| splitmix64(h ^ v))
}

/// `(1/n) Σ (f̂_i - f_i)²`.
pub fn mse(f_hat: &[f64], f: &[f64]) -> Result<f64> {
    if f_hat.len() != f.len() || f.is_empty() {
        return Err(Error::length(
            f_hat.len(),
            format!("cannot compare against {} reference values", f.len()),
        ));
    }
    let ss: f64 = f_hat.iter().zip(f).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(ss / f.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub signal: SignalKind,
    pub n: usize,
    pub snr: f64,
    pub method: Method,
    pub amse: f64,
    pub sd_mse: f64,
    pub replications: usize,
    pub seeds_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationMse {
    pub signal: SignalKind,
    pub n: usize,
    pub snr: f64,
    pub method: Method,
    pub replication: usize,
    pub seed: u64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub spec: BenchmarkSpec,
    pub seed_derivation: String,
    pub rows: Vec<ReportRow>,
    #[serde(skip)]
    pub replications: Vec<ReplicationMse>,
}

impl BenchmarkReport {
    pub fn row(&self, signal: SignalKind, n: usize, snr: f64, method: Method) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.signal == signal && r.n == n && r.snr == snr && r.method == method)
    }

    /// One row per scenario and method.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let c = &self.spec.config;
        writeln!(
            w,
            "signal,n,snr,method,amse,sd_mse,replications,seeds_digest,d,alpha,tau,quad_order,sigma_policy,filter,coarsest_level,target_sd,master_seed"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:?},{},{:?},{:?},{},{},{:?},{:?},{:?},{},{},{},{},{:?},{}",
                r.signal,
                r.n,
                r.snr,
                r.method,
                r.amse,
                r.sd_mse,
                r.replications,
                r.seeds_digest,
                self.spec.d,
                c.alpha,
                c.tau,
                c.quad_order,
                c.sigma_policy,
                self.spec.filter,
                self.spec.coarsest_level,
                self.spec.target_sd,
                self.spec.master_seed,
            )?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)
    }

    /// Per-replication MSEs: `signal,n,snr,method,replication,seed,mse`.
    pub fn write_mse_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "signal,n,snr,method,replication,seed,mse")?;
        for r in &self.replications {
            writeln!(
                w,
                "{},{},{:?},{},{},{},{:?}",
                r.signal, r.n, r.snr, r.method, r.replication, r.seed, r.mse
            )?;
        }
        Ok(())
    }
}

struct Replication {
    seed: u64,
    digest: [u8; 32],
    mses: Vec<f64>,
}

fn replicate(spec: &BenchmarkSpec, sc: &Scenario, r: usize) -> Result<Replication> {
    let seed = child_seed(spec.master_seed, sc, r);
    let signal = generate(sc.signal, sc.n + 1, spec.target_sd)?;
    let f = signal.values();
    let sigma_a = calibrate_sigma_a(f, sc.snr, spec.d)?;
    let noise = simulate(&ArfimaSpec::new(spec.d, sigma_a, sc.n + 1, seed)?)?;
    let y: Vec<f64> = f.iter().zip(noise.values()).map(|(a, b)| a + b).collect();

    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for v in &y {
        hasher.update(v.to_le_bytes());
    }
    let digest: [u8; 32] = hasher.finalize().into();

    let denoiser =
        Denoiser::new(spec.filter.clone(), spec.config).with_coarsest_level(spec.coarsest_level);
    let mses = spec
        .methods
        .iter()
        .map(|&m| {
            let f_hat = match m {
                Method::LogDiff => {
                    let mut out = denoiser.estimate(m, &y)?.f_hat.into_values();
                    out.remove(0);
                    out
                }
                _ => denoiser.estimate(m, &y[1..])?.f_hat.into_values(),
            };
            mse(&f_hat, &f[1..])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Replication { seed, digest, mses })
}

/// Mean and sample (`n - 1`) standard deviation, by Welford's update.
pub fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let sd = if values.len() > 1 {
        (m2 / (values.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Runs the experiment on the global rayon pool.
pub fn run(spec: &BenchmarkSpec) -> Result<BenchmarkReport> {
    run_with_threads(spec, None)
}

/// Runs the experiment on a dedicated pool of `threads` workers (or the
/// global pool when `None`). The report does not depend on `threads`.
pub fn run_with_threads(spec: &BenchmarkSpec, threads: Option<usize>) -> Result<BenchmarkReport> {
    spec.validate()?;
    match threads {
        None => run_inner(spec),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?
            .install(|| run_inner(spec)),
    }
}

fn run_inner(spec: &BenchmarkSpec) -> Result<BenchmarkReport> {
    let scenarios = spec.scenarios();
    let reps = spec.replications;
    let results: Vec<Replication> = (0..scenarios.len() * reps)
        .into_par_iter()
        .map(|item| {
            let sc = &scenarios[item / reps];
            let r = item % reps;
            replicate(spec, sc, r).map_err(|e| Error::Scenario {
                signal: sc.signal.to_string(),
                n: sc.n,
                snr: sc.snr,
                replication: r,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut replications = Vec::new();
    for (s, sc) in scenarios.iter().enumerate() {
        let block = &results[s * reps..(s + 1) * reps];
        let mut hasher = Sha256::new();
        for rep in block {
            hasher.update(rep.digest);
        }
        let digest: String = hasher
            .finalize()
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect();
        for (mi, &method) in spec.methods.iter().enumerate() {
            let mses: Vec<f64> = block.iter().map(|rep| rep.mses[mi]).collect();
            let (amse, sd_mse) = mean_and_sd(&mses);
            rows.push(ReportRow {
                signal: sc.signal,
                n: sc.n,
                snr: sc.snr,
                method,
                amse,
                sd_mse,
                replications: reps,
                seeds_digest: digest.clone(),
            });
            replications.extend(block.iter().enumerate().map(|(r, rep)| ReplicationMse {
                signal: sc.signal,
                n: sc.n,
                snr: sc.snr,
                method,
                replication: r,
                seed: rep.seed,
                mse: rep.mses[mi],
            }));
        }
    }
    Ok(BenchmarkReport {
        spec: spec.clone(),
        seed_derivation: SEED_DERIVATION.to_string(),
        rows,
        replications,
    })
}
