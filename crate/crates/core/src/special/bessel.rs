//! J-Bessel functions of real order: ascending series, Miller's backward
//! recurrence, Hankel's asymptotic expansion, and the Mellin–Barnes
//! contour representation.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::contour::{integrate_path, ContourPath, Decay};
use super::gamma::ln_gamma;
use super::PrecisionConfig;
use crate::error::{Error, Result};

/// Crossover to the asymptotic expansion.
pub fn asymptotic_threshold(order: f64) -> f64 {
    (2.0 * (order + 10.0)).max(25.0)
}

/// `J_ν(x)` for real `ν ≥ 0`, `x > 0`.
pub fn bessel_j(order: f64, x: f64, cfg: &PrecisionConfig) -> Result<f64> {
    if !(order >= 0.0) {
        return Err(Error::Domain(format!(
            "bessel_j needs order >= 0, got {order}"
        )));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!("bessel_j needs x > 0, got {x}")));
    }
    if x <= 4.0 || x * x < 4.0 * (order + 1.0) {
        series(order, x, cfg)
    } else if x >= asymptotic_threshold(order) {
        hankel(order, x, cfg)
    } else {
        miller(order, x)
    }
}

fn series(order: f64, x: f64, cfg: &PrecisionConfig) -> Result<f64> {
    let half = x / 2.0;
    let lead = (order * half.ln() - ln_gamma(Complex64::new(order + 1.0, 0.0)).re).exp();
    let q = -half * half;
    let mut term = 1.0;
    let mut total = 1.0;
    let mut biggest = 1.0f64;
    for k in 1..cfg.series_cutoff.max(50) {
        let kf = k as f64;
        term *= q / (kf * (kf + order));
        total += term;
        biggest = biggest.max(term.abs());
        if term.abs() < 1e-17 * total.abs() {
            return Ok(lead * total);
        }
    }
    Err(Error::PrecisionExhausted(format!(
        "Bessel series for J_{order}({x}) did not converge (largest term {biggest:e})"
    )))
}

/// Backward recurrence from order `ν + N`, normalized with
/// `(x/2)^ν / Γ(ν+1) = Σ_k d_k J_{ν+2k}(x)`.
fn miller(order: f64, x: f64) -> Result<f64> {
    let n_extra = (x + 40.0 + 10.0 * x.sqrt()).ceil() as usize;
    let mut j_next = 0.0f64;
    let mut j_cur = 1e-300f64;
    let mut values = vec![0.0f64; n_extra + 1];
    values[n_extra] = j_cur;
    for k in (1..=n_extra).rev() {
        let mu = order + k as f64;
        let j_prev = 2.0 * mu / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        values[k - 1] = j_cur;
        if j_cur.abs() > 1e250 {
            for v in values.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
            j_next *= 1e-250;
            j_cur *= 1e-250;
        }
    }
    // d_0 = 1, d_k = (ν + 2k) Γ(ν+k) / (k! Γ(ν+1))
    let mut norm = values[0];
    let mut r = 1.0;
    let mut k = 1;
    while 2 * k <= n_extra {
        if k > 1 {
            r *= (order + k as f64 - 1.0) / k as f64;
        }
        norm += (order + 2.0 * k as f64) * r * values[2 * k];
        k += 1;
    }
    let target = (order * (x / 2.0).ln() - ln_gamma(Complex64::new(order + 1.0, 0.0)).re).exp();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::PrecisionExhausted(format!(
            "Miller recurrence failed for J_{order}({x})"
        )));
    }
    Ok(values[0] * target / norm)
}

fn hankel(order: f64, x: f64, cfg: &PrecisionConfig) -> Result<f64> {
    let mu = 4.0 * order * order;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200usize {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if a.abs() >= last && k > order as usize + 2 {
            break;
        }
        last = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    if last > cfg.target_tol {
        return Err(Error::PrecisionExhausted(format!(
            "Hankel expansion for J_{order}({x}) stalls at {last:e}"
        )));
    }
    let chi = x - (order / 2.0 + 0.25) * PI;
    Ok((2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin()))
}

/// `J_{λ−1}(4πy)` as `(1/2πi) ∫_{Re u = σ₀} Γ(u + a) / Γ(b − u) (2πy)^{−2u} du`
/// with `a = (λ−1)/2`, `b = (λ+1)/2`, the Γ_C form with the `(2π)` powers
/// collected. Takes `order = λ − 1`.
pub fn bessel_j_mellin_barnes(
    order: f64,
    y: f64,
    sigma0: f64,
    cfg: &PrecisionConfig,
) -> Result<f64> {
    let a = order / 2.0;
    let b = order / 2.0 + 1.0;
    if !(sigma0 > -a && sigma0 < 0.0) {
        return Err(Error::Contour(format!(
            "sigma0 = {sigma0} outside the legal strip ({}, 0)",
            -a
        )));
    }
    if !(y > 0.0) {
        return Err(Error::Domain(format!("y must be positive, got {y}")));
    }
    let ln_base = (2.0 * PI * y).ln();
    let integrand = |u: Complex64| (ln_gamma(u + a) - ln_gamma(b - u) - 2.0 * u * ln_base).exp();
    let bend = -(3.0 / (2.0 * PI * y)).clamp(0.02, 0.5);
    let path = ContourPath::bent(sigma0, bend, 1.0);
    let res = integrate_path(integrand, &path, Decay::Rapid, &[], cfg)?;
    Ok(res.value.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j32(x: f64) -> f64 {
        (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos())
    }

    fn j72(x: f64) -> f64 {
        // spherical Bessel j_3 scaled: J_{7/2}(x) = sqrt(2x/π) j_3(x)
        let (s, c) = x.sin_cos();
        let j3 = (15.0 / x.powi(4) - 6.0 / x.powi(2)) * s - (15.0 / x.powi(3) - 1.0 / x) * c;
        (2.0 * x / PI).sqrt() * j3
    }

    #[test]
    fn half_integer_closed_forms() {
        let cfg = PrecisionConfig::default();
        for x in [0.3, 1.0, 3.7, 10.0, 17.0, 30.0, 100.0, 1000.0] {
            let v = bessel_j(1.5, x, &cfg).unwrap();
            assert!((v - j32(x)).abs() < 1e-13, "J_3/2({x}) = {v} vs {}", j32(x));
            let w = bessel_j(3.5, x, &cfg).unwrap();
            let tol = if x < 1.0 { 1e-10 } else { 1e-13 };
            assert!((w - j72(x)).abs() < tol, "J_7/2({x}) = {w} vs {}", j72(x));
        }
    }

    #[test]
    fn integer_order_reference_values() {
        let cfg = PrecisionConfig::default();
        let refs = [
            (0.0, 1.0, 0.765_197_686_557_966_6),
            (0.0, 10.0, -0.245_935_764_451_348_3),
            (1.0, 5.0, -0.327_579_137_591_465_2),
            (2.0, 20.0, -0.160_341_351_922_998_15),
        ];
        for (nu, x, v) in refs {
            let got = bessel_j(nu, x, &cfg).unwrap();
            assert!((got - v).abs() < 1e-13, "J_{nu}({x}) = {got}");
        }
    }

    #[test]
    fn small_argument_leading_term() {
        let cfg = PrecisionConfig::default();
        let x: f64 = 1e-4;
        let lead = (x / 2.0).powf(3.5) / ln_gamma(Complex64::new(4.5, 0.0)).re.exp();
        let v = bessel_j(3.5, x, &cfg).unwrap();
        assert!(((v - lead) / lead).abs() < 1e-8);
    }

    #[test]
    fn method_continuity_at_crossovers() {
        let cfg = PrecisionConfig::default();
        for nu in [0.5, 3.5, 7.5, 11.5] {
            let x0 = asymptotic_threshold(nu);
            let a = miller(nu, x0).unwrap();
            let b = hankel(nu, x0, &cfg).unwrap();
            assert!((a - b).abs() < 1e-12, "nu={nu}: {a} vs {b}");
            let c = miller(nu, 4.0).unwrap();
            let d = series(nu, 4.0, &cfg).unwrap();
            assert!((c - d).abs() < 1e-13, "nu={nu}: {c} vs {d}");
        }
    }
}
