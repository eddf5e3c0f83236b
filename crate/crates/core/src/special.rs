//! Gamma-function helpers that keep track of sign for negative arguments.

use std::f64::consts::PI;

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

/// `(ln|Γ(x)|, sign Γ(x))`. Poles (non-positive integers) give `(inf, 0.0)`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (ln_gamma(x), 1.0);
    }
    if x == x.floor() {
        return (f64::INFINITY, 0.0);
    }
    // reflection: Γ(x) Γ(1 - x) = π / sin(πx)
    let s = (PI * x).sin();
    ((PI / s.abs()).ln() - ln_gamma(1.0 - x), s.signum())
}

/// Γ(a) / Γ(b) for arguments away from the poles.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    let (la, sa) = ln_gamma_signed(a);
    let (lb, sb) = ln_gamma_signed(b);
    sa * sb * (la - lb).exp()
}

/// `ln P(Z > z)` for a standard normal `Z`, accurate far into the upper tail.
pub fn ln_normal_tail(z: f64) -> f64 {
    if z < 30.0 {
        return (0.5 * erfc(z / std::f64::consts::SQRT_2)).ln();
    }
    let r = 1.0 / (z * z);
    let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
    -0.5 * z * z - z.ln() - 0.5 * (2.0 * PI).ln() + series.ln()
}
