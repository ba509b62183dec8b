//! The F_λ(s, x) contour integral, the Mellin transform of
//! `f_λ(y) = cos(λ arccos y) / √(1 − y²)` on (0, 1), and Chebyshev
//! polynomials of the third kind.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::contour::{integrate_path, ContourPath, ContourResult, Decay};
use super::gamma::{gamma_c, ln_gamma_c, ln_gamma_ratio, rgamma, GammaFactorSpec};
use super::PrecisionConfig;
use crate::arith::HalfIntegralWeight;
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Checks the parameter ranges under which F_λ(s, x) is defined.
pub fn check_f_domain(weight: HalfIntegralWeight, s: Complex64, x: f64, sigma1: f64) -> Result<()> {
    let lambda = weight.value();
    if weight.two_lambda() < 9 {
        return Err(Error::Domain(format!("F_λ needs λ >= 9/2, got {lambda}")));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!("F_λ needs x > 0, got {x}")));
    }
    if !(s.re > 0.5 && s.re < (lambda - 1.0) / 2.0) {
        return Err(Error::Domain(format!(
            "Re s = {} outside (1/2, {})",
            s.re,
            (lambda - 1.0) / 2.0
        )));
    }
    if !(sigma1 > (1.0 - lambda) / 2.0 && sigma1 < -s.re) {
        return Err(Error::Domain(format!(
            "sigma1 = {sigma1} outside ({}, {})",
            (1.0 - lambda) / 2.0,
            -s.re
        )));
    }
    Ok(())
}

/// A logarithm of the F_λ integrand
/// `Γ_C(u + (λ−1)/2) γ(1−s−u) / (Γ_C(−u + (λ+1)/2) γ(s+u)) · x^u`.
pub fn f_kernel_ln(
    lambda: f64,
    gamma: &GammaFactorSpec,
    s: Complex64,
    ln_x: f64,
    u: Complex64,
) -> Complex64 {
    let a = Complex64::new((lambda - 1.0) / 2.0, 0.0);
    let c = Complex64::new((lambda + 1.0) / 2.0, 0.0);
    match gamma {
        GammaFactorSpec::Hecke { h, nu, .. } => {
            // Powers of 2π collect to (2π)^{2s}; H to H^{1−2s−2u}.
            let e = (nu.value() - 1.0) / 2.0;
            2.0 * s * LN_2PI
                + (1.0 - 2.0 * s - 2.0 * u) * h.ln()
                + ln_gamma_ratio(u, a, s + e)
                + ln_gamma_ratio(-u, 1.0 - s + e, c)
                + u * ln_x
        }
        GammaFactorSpec::General { .. } => {
            ln_gamma_c(u + a) - ln_gamma_c(c - u) + gamma.ln_eval_unchecked(1.0 - s - u)
                - gamma.ln_eval_unchecked(s + u)
                + u * ln_x
        }
    }
}

/// Picks the path for F_λ: bend towards the side into which the kernel
/// decays, or stay on the line when it only decays algebraically.
fn choose_path(
    lambda: f64,
    gamma: &GammaFactorSpec,
    s: Complex64,
    ln_x: f64,
    sigma1: f64,
) -> (ContourPath, Decay, Vec<Complex64>) {
    let right_poles: Vec<Complex64> = gamma
        .reflected_pole_seeds(s)
        .into_iter()
        .map(|(p, _)| p)
        .collect();
    let probe = |path: &ContourPath| -> f64 {
        [40.0, -40.0]
            .iter()
            .map(|&t| f_kernel_ln(lambda, gamma, s, ln_x, path.point(t).0).re)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let straight = ContourPath::vertical(sigma1);
    let base = probe(&straight);
    let left = ContourPath::bent(sigma1, -0.5, 1.0);
    let mut right = ContourPath::bent(sigma1, 0.5, 1.0);
    let right_ok = right.keep_clear_of(&right_poles).is_ok();
    let l = probe(&left);
    let r = if right_ok {
        probe(&right)
    } else {
        f64::INFINITY
    };
    let threshold = base - 3.0 * std::f64::consts::LN_10;
    if l <= r && l < threshold {
        (left, Decay::Rapid, Vec::new())
    } else if r < threshold {
        (right, Decay::Rapid, right_poles)
    } else {
        (straight, Decay::Algebraic(2.0 * s.re), Vec::new())
    }
}

/// F_λ(s, x) with its quadrature diagnostics.
pub fn f_integral_detailed(
    weight: HalfIntegralWeight,
    gamma: &GammaFactorSpec,
    s: Complex64,
    x: f64,
    sigma1: f64,
    cfg: &PrecisionConfig,
) -> Result<ContourResult> {
    check_f_domain(weight, s, x, sigma1)?;
    gamma.validate()?;
    let lambda = weight.value();
    let ln_x = x.ln();
    let (path, decay, poles) = choose_path(lambda, gamma, s, ln_x, sigma1);
    integrate_path(
        |u| f_kernel_ln(lambda, gamma, s, ln_x, u).exp(),
        &path,
        decay,
        &poles,
        cfg,
    )
}

/// `F_λ(s, x) = (1/2πi) ∫_{Re u = σ₁} Γ_C(u + (λ−1)/2) γ(1−s−u) /
/// (Γ_C(−u + (λ+1)/2) γ(s+u)) x^u du`.
pub fn f_integral(
    weight: HalfIntegralWeight,
    gamma: &GammaFactorSpec,
    s: Complex64,
    x: f64,
    sigma1: f64,
    cfg: &PrecisionConfig,
) -> Result<Complex64> {
    Ok(f_integral_detailed(weight, gamma, s, x, sigma1, cfg)?.value)
}

/// `1/Γ_C(z)`, zero at the poles of Γ_C.
fn rgamma_c(z: Complex64) -> Complex64 {
    rgamma(z) * (z * LN_2PI).exp() * 0.5
}

/// Closed form of `∫₀^∞ f_λ(y) y^{s−1} dy`:
/// `Γ_C(s) / (2^s Γ_C((s+λ+1)/2) Γ_C((s−λ+1)/2))`.
pub fn f_lambda_mellin_closed(lambda: f64, s: Complex64) -> Result<Complex64> {
    Ok(gamma_c(s)?
        * (-s * std::f64::consts::LN_2).exp()
        * rgamma_c((s + lambda + 1.0) / 2.0)
        * rgamma_c((s - lambda + 1.0) / 2.0))
}

/// `∫₀^{π/2} cos(λθ) cos(θ)^{s−1} dθ`, the Mellin transform after
/// `y = cos θ`, by tanh-sinh quadrature (the endpoint singularity at
/// θ = π/2 is integrable for Re s > 0).
pub fn f_lambda_mellin_quadrature(
    lambda: f64,
    s: Complex64,
    cfg: &PrecisionConfig,
) -> Result<Complex64> {
    if !(s.re > 0.0) {
        return Err(Error::Domain(format!("needs Re s > 0, got {s}")));
    }
    let half = PI / 4.0;
    // θ = π/4 (1 + tanh(π/2 sinh t)); π/2 − θ computed without cancellation.
    let f = |t: f64| -> Complex64 {
        let y = PI / 2.0 * t.sinh();
        let e = (-2.0 * y.abs()).exp();
        let one_minus = if y >= 0.0 {
            2.0 * e / (1.0 + e)
        } else {
            2.0 / (1.0 + e)
        };
        let one_plus = 2.0 - one_minus;
        let theta = half * one_plus;
        let gap = half * one_minus;
        let dtheta = half * PI / 2.0 * t.cosh() * one_minus * one_plus;
        if gap <= 0.0 || theta <= 0.0 || dtheta == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let cos_theta = gap.sin();
        let val = (lambda * theta).cos() * ((s - 1.0) * cos_theta.ln()).exp();
        val * dtheta
    };
    let t_max = 4.5;
    let mut h = 0.5;
    let mut sum = f(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += f(k as f64 * h) + f(-(k as f64) * h);
        k += 1;
    }
    let mut est = sum * h;
    let mut l1 = 0.0;
    for _ in 0..10 {
        let h2 = h / 2.0;
        let mut k = 1usize;
        while (2 * k - 1) as f64 * h2 <= t_max {
            let t = (2 * k - 1) as f64 * h2;
            let (a, b) = (f(t), f(-t));
            l1 += (a.norm() + b.norm()) * h2;
            sum += a + b;
            k += 1;
        }
        h = h2;
        let next = sum * h;
        let diff = (next - est).norm();
        est = next;
        if diff < cfg.target_tol * est.norm().max(1e-3 * l1) {
            return Ok(est);
        }
    }
    Err(Error::PrecisionExhausted(format!(
        "tanh-sinh quadrature for the f_λ Mellin transform did not converge at s = {s}"
    )))
}

/// Quadrature and closed form of the f_λ Mellin transform.
pub fn f_lambda_mellin_check(
    weight: HalfIntegralWeight,
    s: Complex64,
    cfg: &PrecisionConfig,
) -> Result<(Complex64, Complex64)> {
    let lambda = weight.value();
    Ok((
        f_lambda_mellin_quadrature(lambda, s, cfg)?,
        f_lambda_mellin_closed(lambda, s)?,
    ))
}

/// Chebyshev polynomial of the third kind, `V_n(cos θ) = cos((n+½)θ) / cos(θ/2)`.
pub fn chebyshev_v(n: usize, v: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * v - 1.0);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = 2.0 * v * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `∫_{−1}^{1} V_n(v) w(v) √((1+v)/(1−v)) dv`, computed after `v = cos θ` as
/// `∫₀^π V_n(cos θ) w(cos θ) (1 + cos θ) dθ` by the (spectrally accurate)
/// trapezoid rule on the even periodic integrand.
pub fn chebyshev_v_weighted_integral<W: Fn(f64) -> f64>(n: usize, w: W, nodes: usize) -> f64 {
    let h = PI / nodes as f64;
    let mut total = 0.0;
    for k in 0..=nodes {
        let theta = k as f64 * h;
        let c = theta.cos();
        let weight = if k == 0 || k == nodes { 0.5 } else { 1.0 };
        total += weight * chebyshev_v(n, c) * w(c) * (1.0 + c);
    }
    total * h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mellin_trivial_lambda() {
        let cfg = PrecisionConfig::default();
        let q = f_lambda_mellin_quadrature(0.0, c(1.0, 0.0), &cfg).unwrap();
        assert!((q - c(PI / 2.0, 0.0)).norm() < 1e-12);
        let closed = f_lambda_mellin_closed(0.0, c(1.0, 0.0)).unwrap();
        assert!((closed - c(PI / 2.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn mellin_agreement() {
        let cfg = PrecisionConfig::default();
        for lambda in [3.5, 2.5, 5.5] {
            for s in [c(2.0, 0.0), c(0.4, 1.5), c(1.3, -0.7)] {
                let q = f_lambda_mellin_quadrature(lambda, s, &cfg).unwrap();
                let cl = f_lambda_mellin_closed(lambda, s).unwrap();
                assert!(
                    (q - cl).norm() < 1e-9 * cl.norm().max(1.0),
                    "{lambda} {s}: {q} vs {cl}"
                );
            }
        }
    }

    #[test]
    fn mellin_zero_of_closed_form() {
        // (s − λ + 1)/2 = 0 at s = λ − 1
        let cfg = PrecisionConfig::default();
        let lambda = 3.5;
        let s = c(2.5, 0.0);
        assert_eq!(f_lambda_mellin_closed(lambda, s).unwrap(), c(0.0, 0.0));
        assert!(f_lambda_mellin_quadrature(lambda, s, &cfg).unwrap().norm() < 1e-10);
    }

    #[test]
    fn chebyshev_v_trig_form_and_orthogonality() {
        for n in 0..8 {
            for theta in [0.1, 0.9, 2.0, 3.0] {
                let v = chebyshev_v(n, f64::cos(theta));
                let trig = ((n as f64 + 0.5) * theta).cos() / (theta / 2.0).cos();
                assert!((v - trig).abs() < 1e-12);
            }
        }
        for n in 0..=6 {
            for m in 0..=6 {
                let ip = chebyshev_v_weighted_integral(n, |v| chebyshev_v(m, v), 64);
                let expect = if n == m { PI } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12, "<V{n},V{m}> = {ip}");
            }
        }
    }
}
