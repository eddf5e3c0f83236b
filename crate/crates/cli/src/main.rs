mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use logdiff_core::arfima::{self, ArfimaSpec};
use logdiff_core::bench::{self, BenchmarkSpec};
use logdiff_core::pipeline::{self, Denoiser, Method, DEFAULT_COARSEST_LEVEL};
use logdiff_core::series::{l2_norm, sample_sd};
use logdiff_core::shrinkage::{
    ShrinkageConfig, SigmaPolicy, DEFAULT_ALPHA, DEFAULT_QUAD_ORDER, DEFAULT_TAU,
};
use logdiff_core::testfuncs::{self, SignalKind, DEFAULT_TARGET_SD};
use logdiff_core::wavelet::{self, WaveletFilter};

use crate::io::{read_series, write_output, DataError};

/// Wavelet shrinkage under long-memory noise: simulation, denoising and
/// benchmarks.
#[derive(Debug, Parser)]
#[command(name = "logdiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate ARFIMA(0, d, 0) noise as `index,value` CSV.
    Simulate(SimulateArgs),
    /// Evaluate a Donoho-Johnstone test signal as `index,value` CSV,
    /// optionally with ARFIMA noise added.
    Signal(SignalArgs),
    /// Denoise a one-column CSV series; writes `index,y,f_hat`.
    Denoise(DenoiseArgs),
    /// Sample autocorrelation of a CSV series as `lag,value` rows.
    Acf(AcfArgs),
    /// Run the Monte Carlo benchmark and write `<out>.csv` and `<out>.json`.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Memory parameter, in (-0.5, 0.5).
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    d: f64,
    /// Innovation standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sigma_a: f64,
    /// Number of points.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SignalArgs {
    /// bumps, blocks, doppler or heavisine.
    #[arg(long)]
    signal: SignalKind,
    /// Number of points (the grid is x_i = i / n, i = 0..n-1).
    #[arg(long)]
    n: usize,
    /// Sample standard deviation the signal is rescaled to.
    #[arg(long, default_value_t = DEFAULT_TARGET_SD)]
    target_sd: f64,
    /// Add ARFIMA noise with sd(signal) / sd(noise) equal to this value.
    #[arg(long)]
    snr: Option<f64>,
    /// Memory parameter of the added noise.
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    d: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ShrinkArgs {
    /// Wavelet filter: haar or dbK (K vanishing moments, 1..=10).
    #[arg(long, default_value = "db2")]
    filter: WaveletFilter,
    /// Prior weight of the point mass at zero.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Scale of the logistic prior component.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    /// Gauss-Hermite order (even, 16..=192).
    #[arg(long, default_value_t = DEFAULT_QUAD_ORDER)]
    quad_order: usize,
    /// per-level-mad, finest-level-mad or fixed:<sigma>.
    #[arg(long, default_value = "per-level-mad")]
    sigma_policy: SigmaPolicy,
    /// Coarsest resolution level kept unshrunk; 0 transforms to full depth.
    #[arg(long, default_value_t = DEFAULT_COARSEST_LEVEL)]
    coarsest_level: usize,
}

impl ShrinkArgs {
    fn config(&self) -> Result<ShrinkageConfig> {
        let config = ShrinkageConfig {
            alpha: self.alpha,
            tau: self.tau,
            quad_order: self.quad_order,
            sigma_policy: self.sigma_policy,
            ..ShrinkageConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct DenoiseArgs {
    /// Input CSV; stdin when omitted or `-`.
    input: Option<PathBuf>,
    /// logdiff, logistic or universal.
    #[arg(long, default_value = "logdiff")]
    method: Method,
    #[command(flatten)]
    shrink: ShrinkArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the empirical wavelet coefficients (of the differences for
    /// logdiff) as `level,index,value` CSV.
    #[arg(long)]
    dump_coeffs: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AcfArgs {
    /// Input CSV; stdin when omitted or `-`.
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    max_lag: usize,
    /// Difference the series before computing the ACF.
    #[arg(long)]
    difference: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated signals.
    #[arg(long = "signals", alias = "signal", value_delimiter = ',',
          default_value = "bumps,blocks,doppler,heavisine")]
    signals: Vec<SignalKind>,
    /// Comma-separated sample sizes (powers of two).
    #[arg(long, value_delimiter = ',', default_value = "512,2048")]
    n: Vec<usize>,
    /// Comma-separated signal-to-noise ratios.
    #[arg(long, value_delimiter = ',', default_value = "3,9")]
    snr: Vec<f64>,
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    d: f64,
    /// Replications per scenario (at least 2).
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long, default_value_t = 2025)]
    seed: u64,
    /// Comma-separated methods.
    #[arg(long = "methods", alias = "method", value_delimiter = ',',
          default_value = "universal,logistic,logdiff")]
    methods: Vec<Method>,
    #[command(flatten)]
    shrink: ShrinkArgs,
    #[arg(long, default_value_t = DEFAULT_TARGET_SD)]
    target_sd: f64,
    /// Worker threads; all cores when omitted. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Output prefix: writes `<out>.csv` and `<out>.json`.
    #[arg(long, default_value = "bench")]
    out: PathBuf,
    /// Also write per-replication MSEs to this CSV.
    #[arg(long)]
    dump_mse: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<DataError>().is_some() {
        return 3;
    }
    if let Some(core) = e.downcast_ref::<logdiff_core::Error>() {
        return match core {
            err if err.is_domain() => 4,
            logdiff_core::Error::Invalid(_) => 2,
            _ => 3,
        };
    }
    if e.downcast_ref::<std::io::Error>().is_some() {
        return 3;
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Signal(a) => signal(a),
        Command::Denoise(a) => denoise(a),
        Command::Acf(a) => acf(a),
        Command::Bench(a) => run_bench(a),
    }
}

fn write_indexed(out: Option<&Path>, values: &[f64]) -> Result<()> {
    write_output(out, |w| {
        writeln!(w, "index,value")?;
        for (i, v) in values.iter().enumerate() {
            writeln!(w, "{i},{v:?}")?;
        }
        Ok(())
    })
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let spec = ArfimaSpec::new(a.d, a.sigma_a, a.n, a.seed)?;
    let noise = arfima::simulate(&spec)?;
    write_indexed(a.out.as_deref(), &noise)
}

fn signal(a: SignalArgs) -> Result<()> {
    if let Some(snr) = a.snr {
        if !(snr.is_finite() && snr > 0.0) {
            return Err(logdiff_core::Error::Domain {
                name: "snr",
                value: snr,
                range: "(0, inf)",
            }
            .into());
        }
    }
    let sig = testfuncs::generate(a.signal, a.n, a.target_sd)?;
    let mut values = sig.values().to_vec();
    if let Some(snr) = a.snr {
        let sigma_a = testfuncs::calibrate_sigma_a(&values, snr, a.d)?;
        let noise = arfima::simulate(&ArfimaSpec::new(a.d, sigma_a, a.n, a.seed)?)?;
        for (v, e) in values.iter_mut().zip(noise.iter()) {
            *v += e;
        }
    }
    write_indexed(a.out.as_deref(), &values)
}

/// Largest usable prefix: `2^J + 1` points for Log-Diff, `2^J` otherwise.
fn usable_len(len: usize, method: Method) -> usize {
    let extra = usize::from(method == Method::LogDiff);
    if len <= extra {
        return 0;
    }
    let pow = 1usize << (usize::BITS - 1 - (len - extra).leading_zeros());
    pow + extra
}

fn denoise(a: DenoiseArgs) -> Result<()> {
    let config = a.shrink.config()?;
    let y = read_series(a.input.as_deref())?;
    let min = if a.method == Method::LogDiff { pipeline::ANCHOR_LEN + 1 } else { 2 };
    if y.len() < min {
        bail!(DataError(format!(
            "input has {} values; {} needs at least {min}",
            y.len(),
            a.method
        )));
    }
    let used = usable_len(y.len(), a.method);
    if used < y.len() {
        eprintln!(
            "warning: truncating input from {} to {used} values ({})",
            y.len(),
            if a.method == Method::LogDiff { "2^J + 1" } else { "2^J" }
        );
    }
    let y = &y[..used];
    let denoiser = Denoiser::new(a.shrink.filter.clone(), config)
        .with_coarsest_level(a.shrink.coarsest_level);
    let f_hat = denoiser.estimate(a.method, y)?.f_hat.into_values();

    if let Some(path) = &a.dump_coeffs {
        let x = if a.method == Method::LogDiff { pipeline::difference(y)? } else { y.to_vec() };
        let dec = wavelet::dwt(&x, &denoiser.filter, denoiser.levels_for(x.len()))?;
        write_output(Some(path), |w| dec.write_csv(w))?;
    }

    write_output(a.out.as_deref(), |w| {
        writeln!(w, "index,y,f_hat")?;
        for (i, (v, f)) in y.iter().zip(&f_hat).enumerate() {
            writeln!(w, "{i},{v:?},{f:?}")?;
        }
        Ok(())
    })?;

    let resid: Vec<f64> = y.iter().zip(&f_hat).map(|(v, f)| v - f).collect();
    let sd_f = sample_sd(&f_hat);
    let sd_r = sample_sd(&resid);
    eprintln!(
        "n={} method={} l2(y)={:.6} l2(f_hat)={:.6} sd(f_hat)={:.6} sd(resid)={:.6} snr_est={:.6}",
        y.len(),
        a.method,
        l2_norm(y),
        l2_norm(&f_hat),
        sd_f,
        sd_r,
        sd_f / sd_r
    );
    Ok(())
}

fn acf(a: AcfArgs) -> Result<()> {
    let mut x = read_series(a.input.as_deref())?;
    if a.difference {
        x = pipeline::difference(&x)?;
    }
    if x.len() <= a.max_lag {
        bail!(DataError(format!(
            "series of length {} is too short for max lag {}",
            x.len(),
            a.max_lag
        )));
    }
    let acf = arfima::sample_acf(&x, a.max_lag)?;
    write_output(a.out.as_deref(), |w| {
        writeln!(w, "lag,value")?;
        for k in 0..=acf.maxlag() {
            writeln!(w, "{k},{:?}", acf.lag(k))?;
        }
        Ok(())
    })
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn run_bench(a: BenchArgs) -> Result<()> {
    if a.threads == Some(0) {
        return Err(logdiff_core::Error::Invalid("--threads must be at least 1".into()).into());
    }
    let spec = BenchmarkSpec {
        signals: a.signals,
        n_values: a.n,
        snr_values: a.snr,
        d: a.d,
        replications: a.reps,
        master_seed: a.seed,
        methods: a.methods,
        config: a.shrink.config()?,
        filter: a.shrink.filter.clone(),
        target_sd: a.target_sd,
        coarsest_level: a.shrink.coarsest_level,
    };
    spec.validate()?;
    let prefix = match a.out.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("json") => a.out.with_extension(""),
        _ => a.out.clone(),
    };
    let report = bench::run_with_threads(&spec, a.threads)?;
    let csv_path = with_extension(&prefix, "csv");
    let json_path = with_extension(&prefix, "json");
    write_output(Some(&csv_path), |w| report.write_csv(w))?;
    write_output(Some(&json_path), |w| report.write_json(w))?;
    if let Some(path) = &a.dump_mse {
        write_output(Some(path), |w| report.write_mse_csv(w))?;
    }
    eprintln!(
        "wrote {} and {} ({} rows)",
        csv_path.display(),
        json_path.display(),
        report.rows.len()
    );
    Ok(())
}
