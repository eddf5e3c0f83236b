use logdiff_core::arfima::{self, ArfimaSpec};
use logdiff_core::pipeline::difference;
use statrs::function::gamma::ln_gamma;

const N: usize = 1 << 16;
const SEEDS: u64 = 20;

fn gamma_direct(d: f64, n: usize) -> Vec<f64> {
    let g0 = (ln_gamma(1.0 - 2.0 * d) - 2.0 * ln_gamma(1.0 - d)).exp();
    (0..n)
        .map(|k| {
            if k == 0 {
                return g0;
            }
            let k = k as f64;
            g0 * (ln_gamma(k + d) + ln_gamma(1.0 - d) - ln_gamma(k - d + 1.0) - ln_gamma(d)).exp()
        })
        .collect()
}

/// Ratio of expectations of the numerator and denominator of the
/// mean-centred sample ACF for a length-`n` stationary series.
fn expected_sample_acf(g: &[f64], maxlag: usize) -> Vec<f64> {
    let n = g.len();
    let nf = n as f64;
    let mut prefix = vec![0.0; n + 1];
    for k in 0..n {
        prefix[k + 1] = prefix[k] + g[k];
    }
    let var_mean = (nf * g[0] + 2.0 * (1..n).map(|k| (nf - k as f64) * g[k]).sum::<f64>()) / (nf * nf);
    let c: Vec<f64> = (0..n).map(|t| (prefix[t + 1] + prefix[n - t] - g[0]) / nf).collect();
    let den: f64 = (0..n).map(|t| g[0] - 2.0 * c[t] + var_mean).sum();
    (0..=maxlag)
        .map(|k| (0..n - k).map(|t| g[k] - c[t] - c[t + k] + var_mean).sum::<f64>() / den)
        .collect()
}

#[test]
fn sample_acf_matches_its_finite_sample_expectation() {
    let maxlag = 20;
    let mut runs = Vec::new();
    for seed in 0..SEEDS {
        let x = arfima::simulate(&ArfimaSpec::new(0.4, 1.0, N, 300 + seed).unwrap()).unwrap();
        runs.push(arfima::sample_acf(&x, maxlag).unwrap());
    }
    let expected = expected_sample_acf(&gamma_direct(0.4, N), maxlag);
    for (k, &want) in expected.iter().enumerate().skip(1) {
        let vals: Vec<f64> = runs.iter().map(|a| a.lag(k)).collect();
        let m = vals.iter().sum::<f64>() / SEEDS as f64;
        let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (SEEDS - 1) as f64;
        let se = (var / SEEDS as f64).sqrt();
        assert!((m - want).abs() < 3.0 * se, "lag {k}: {m} vs {want} (se {se})");
    }
    // the estimator is biased low under long memory: E ρ̂(1) ≈ 0.629, not 0.667
    assert!((expected[1] - 0.629).abs() < 1e-3, "{}", expected[1]);
}

#[test]
fn differenced_noise_lag_one() {
    let mut total = 0.0;
    for seed in 0..SEEDS {
        let x = arfima::simulate(&ArfimaSpec::new(0.4, 1.0, N, 900 + seed).unwrap()).unwrap();
        total += arfima::sample_acf(&difference(&x).unwrap(), 1).unwrap().lag(1);
    }
    let m = total / SEEDS as f64;
    assert!((m + 0.375).abs() < 0.05, "{m}");
}

#[test]
fn simulators_agree_in_distribution() {
    let n = 1024;
    let lag_means = |method| {
        let mut acc = [0.0; 3];
        for seed in 0..200 {
            let x = arfima::simulate_with(&ArfimaSpec::new(0.3, 1.0, n, seed).unwrap(), method).unwrap();
            for (k, a) in acc.iter_mut().enumerate() {
                *a += x.iter().zip(x.iter().skip(k)).map(|(u, v)| u * v).sum::<f64>() / (n - k) as f64 / 200.0;
            }
        }
        acc
    };
    let dl = lag_means(arfima::SimulationMethod::DurbinLevinson);
    let ce = lag_means(arfima::SimulationMethod::CirculantEmbedding);
    let g = gamma_direct(0.3, 3);
    for k in 0..3 {
        assert!((dl[k] - g[k]).abs() < 0.12 * g[0], "dl lag {k}: {} vs {}", dl[k], g[k]);
        assert!((ce[k] - g[k]).abs() < 0.12 * g[0], "ce lag {k}: {} vs {}", ce[k], g[k]);
    }
}
