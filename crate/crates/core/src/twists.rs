//! Additive twists `L_f(s, a/c) = Σ f_n e(na/c) n^{−s}`, their completions,
//! and numerical checks of the twisted functional equation and of the
//! Hecke-type slash relation.
//!
//! The completion with the natural factor `Γ_C(s + (λ−1)/2)` is
//!
//! `Λ_f(s, a/c) = 2 c^{−w} ∫_0^∞ f(a/c + it/c) t^{w} dt/t`, `w = s + (λ−1)/2`,
//!
//! split at `t = t0`, with the piece below `t0` folded by the modular
//! transformation of `(a b; c ā)`. Both pieces are incomplete-gamma sums
//! that converge like `e^{−2πn/c}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{eps_pow, gcd, i_pow, jacobi_modified, mod_inverse};
use crate::error::{Error, Result};
use crate::forms::{evaluate, multiplier, transform_check, QExpansion};
use crate::special::gamma::{ln_gamma_c, rgamma, upper_gamma};
use crate::special::{GammaFactorSpec, PrecisionConfig};

/// A rational point `a/c` together with an inverse `ā` of `a` modulo `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistFraction {
    pub a: i64,
    pub c: i64,
    pub a_bar: i64,
    pub level: u64,
}

impl TwistFraction {
    /// `ā` is taken in `[0, c)`.
    pub fn new(a: i64, c: i64, level: u64) -> Result<Self> {
        if c <= 0 {
            return Err(Error::InvalidInput(format!(
                "denominator must be positive, got {c}"
            )));
        }
        let a_bar = mod_inverse(a, c)?;
        Ok(Self { a, c, a_bar, level })
    }

    pub fn with_inverse(a: i64, c: i64, a_bar: i64, level: u64) -> Result<Self> {
        if c <= 0 {
            return Err(Error::InvalidInput(format!(
                "denominator must be positive, got {c}"
            )));
        }
        if gcd(a, c) != 1 {
            return Err(Error::NoInverse { a, c });
        }
        if (a as i128 * a_bar as i128 - 1).rem_euclid(c as i128) != 0 {
            return Err(Error::InvalidInput(format!("{a}·{a_bar} is not 1 mod {c}")));
        }
        Ok(Self { a, c, a_bar, level })
    }

    /// Whether `c ∈ level·Z_{>0}`, the range where the functional equation
    /// is claimed.
    pub fn in_fe_range(&self) -> bool {
        self.level > 0 && self.c % self.level as i64 == 0
    }

    /// `−ā/c`, written as `((−ā) mod c)/c` with inverse `−a mod c`.
    pub fn reflected(&self) -> Self {
        Self {
            a: (-self.a_bar).rem_euclid(self.c),
            c: self.c,
            a_bar: (-self.a).rem_euclid(self.c),
            level: self.level,
        }
    }

    /// `(a b; c ā)` of determinant one.
    pub fn matrix(&self) -> (i64, i64, i64, i64) {
        let b = (self.a as i128 * self.a_bar as i128 - 1) / self.c as i128;
        (self.a, b as i64, self.c, self.a_bar)
    }
}

/// `e(k/c)` with `k` reduced exactly.
fn e_frac(k: i128, c: i64) -> Complex64 {
    let r = k.rem_euclid(c as i128) as f64 / c as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r)
}

/// `Σ_{n<=M} f_n e(na/c) n^{−s}`, refusing when the tail bound from the
/// fitted coefficient growth exceeds `target_tol` relative to the value.
pub fn dirichlet_twist(
    f: &QExpansion,
    frac: &TwistFraction,
    s: Complex64,
    cfg: &PrecisionConfig,
) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for &(n, fnn) in f.terms() {
        let nf = n as f64;
        sum += fnn * e_frac(n as i128 * frac.a as i128, frac.c) * (-s * nf.ln()).exp();
    }
    let tail = f.dirichlet_tail(s.re);
    if tail > cfg.target_tol * sum.norm().max(1e-300) {
        let (_, g) = f.growth();
        let need = if s.re > g {
            let mut m = f.cutoff() as f64;
            let probe = |m: f64| tail * (m / f.cutoff() as f64).powf(g - s.re);
            while probe(m) > cfg.target_tol * sum.norm() && m < 1e15 {
                m *= 2.0;
            }
            m as usize
        } else {
            usize::MAX
        };
        return Err(Error::InsufficientCutoff {
            have: f.cutoff(),
            required: need,
            what: format!("Dirichlet series tail at Re s = {}", s.re),
        });
    }
    Ok(sum)
}

/// Upper bound for `Γ(σ, x)` with real `σ` and `x > max(0, 2(σ−1))`.
fn upper_gamma_bound(sigma: f64, x: f64) -> f64 {
    let lead = ((sigma - 1.0) * x.ln() - x).exp();
    if sigma <= 1.0 {
        lead
    } else {
        lead / (1.0 - (sigma - 1.0) / x).max(0.5)
    }
}

/// Bound on `Σ_{n>M} A n^{λ/2} (c/2πn)^σ Γ(σ, 2πn r/c)`.
fn incomplete_sum_tail(a: f64, beta: f64, m: usize, c: f64, sigma: f64, r: f64) -> f64 {
    let term = |n: f64| {
        let x = 2.0 * PI * n * r / c;
        a * n.powf(beta) * (c / (2.0 * PI * n)).powf(sigma) * upper_gamma_bound(sigma, x)
    };
    let n0 = (m + 1) as f64;
    let x0 = 2.0 * PI * n0 * r / c;
    if x0 <= 2.0 * (sigma - 1.0).max(0.0) + 1.0 {
        return f64::INFINITY;
    }
    let ratio = (-2.0 * PI * r / c).exp() * ((n0 + 1.0) / n0).powf(beta + sigma.abs() + 1.0);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    term(n0) / (1.0 - ratio)
}

/// Natural completion `Γ_C(s + (λ−1)/2) L_f(s, a/c)` with the integral
/// split at `t0`, without checking modularity.
fn natural_completion(
    f: &QExpansion,
    frac: &TwistFraction,
    s: Complex64,
    t0: f64,
    cfg: &PrecisionConfig,
) -> Result<Complex64> {
    if f.constant().norm() > 0.0 {
        return Err(Error::InvalidInput(
            "completed twist needs a cusp form (zero constant term)".into(),
        ));
    }
    if !(t0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "split point must be positive, got {t0}"
        )));
    }
    let lambda = f.weight().value();
    let w = s + (lambda - 1.0) / 2.0;
    let w_ref = (lambda + 1.0) / 2.0 - s;
    let (_, _, c, d) = frac.matrix();
    let k = i_pow(lambda) * multiplier(f.character(), f.weight(), c, d)?;
    let cf = c as f64;
    let mut upper = Complex64::new(0.0, 0.0);
    let mut lower = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for &(n, an) in f.support() {
        let nf = n as f64;
        let x_up = 2.0 * PI * nf * t0 / cf;
        let x_lo = 2.0 * PI * nf / (cf * t0);
        if x_up.min(x_lo) > 745.0 {
            break;
        }
        let scale = (cf / (2.0 * PI * nf)).ln();
        let t_up =
            an * e_frac(n as i128 * frac.a as i128, c) * (w * scale).exp() * upper_gamma(w, x_up)?;
        let t_lo = an
            * e_frac(-(n as i128) * d as i128, c)
            * (w_ref * scale).exp()
            * upper_gamma(w_ref, x_lo)?;
        upper += t_up;
        lower += t_lo;
        magnitude += t_up.norm() + t_lo.norm();
    }
    let a_growth = f
        .support()
        .iter()
        .map(|&(n, a)| a.norm() / (n as f64).powf(lambda / 2.0))
        .fold(0.0, f64::max);
    let tail = incomplete_sum_tail(a_growth, lambda / 2.0, f.cutoff(), cf, w.re, t0)
        + incomplete_sum_tail(a_growth, lambda / 2.0, f.cutoff(), cf, w_ref.re, 1.0 / t0);
    if tail > cfg.target_tol * magnitude.max(1e-300) {
        let mut need = f.cutoff().max(1);
        while need < usize::MAX / 4
            && incomplete_sum_tail(a_growth, lambda / 2.0, need, cf, w.re, t0)
                + incomplete_sum_tail(a_growth, lambda / 2.0, need, cf, w_ref.re, 1.0 / t0)
                > cfg.target_tol * magnitude.max(1e-300)
        {
            need *= 2;
        }
        return Err(Error::InsufficientCutoff {
            have: f.cutoff(),
            required: need,
            what: format!("completed twist at c = {c}"),
        });
    }
    Ok((-w * cf.ln()).exp() * (upper + k * lower) * 2.0)
}

/// `γ(s) / Γ_C(s + (λ−1)/2)` written so that it stays finite where the
/// natural factor has poles.
fn gamma_ratio(gamma: &GammaFactorSpec, lambda: f64, s: Complex64) -> Result<Complex64> {
    let z = s + (lambda - 1.0) / 2.0;
    if let GammaFactorSpec::Hecke { c, h, nu } = gamma {
        if nu.value() == lambda {
            return Ok(Complex64::new(*c, 0.0) * (s * h.ln()).exp());
        }
    }
    let inv_natural = (z * (2.0 * PI).ln()).exp() * rgamma(z) / 2.0;
    Ok(gamma.ln_eval(s)?.exp() * inv_natural)
}

/// Residual bound used by the modularity guard of [`completed_twist`].
pub const MODULARITY_GUARD: f64 = 1e-6;

/// `Λ_f(s, a/c)` with the natural factor `Γ_C(s + (λ−1)/2)`. Refuses when
/// `f` does not satisfy its transformation law at `(a b; c ā)`.
pub fn completed_twist(
    f: &QExpansion,
    frac: &TwistFraction,
    s: Complex64,
    cfg: &PrecisionConfig,
) -> Result<Complex64> {
    if frac.c % f.level() as i64 != 0 {
        return Err(Error::InvalidInput(format!(
            "denominator {} is not a multiple of the level {}",
            frac.c,
            f.level()
        )));
    }
    let residual = transform_check(f, frac.matrix(), cfg)?;
    if !(residual <= MODULARITY_GUARD) {
        return Err(Error::NotModular {
            residual,
            tol: MODULARITY_GUARD,
        });
    }
    natural_completion(f, frac, s, 1.0, cfg)
}

/// `χ(ā) ε_a^{−δ} (c/a) c^{1−2s}`, the factor multiplying `ω Λ(1−s, −ā/c)`.
pub fn fe_factor(
    f: &QExpansion,
    frac: &TwistFraction,
    delta: u8,
    s: Complex64,
) -> Result<Complex64> {
    let chi = f.character().value(frac.a_bar);
    let eps = eps_pow(frac.a, -(delta as i64))?;
    let sym = jacobi_modified(frac.c, frac.a)? as f64;
    let cpow = ((1.0 - 2.0 * s) * (frac.c as f64).ln()).exp();
    Ok(chi * eps * sym * cpow)
}

/// How `ω` is obtained in [`fe_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OmegaMode {
    Fixed(Complex64),
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeReport {
    /// `R(s)` at the grid midpoint.
    pub omega_hat: Complex64,
    /// `max |R(s)/ω − 1|` over the evaluated grid points.
    pub max_rel_dev: f64,
    pub skipped_points: Vec<Complex64>,
}

/// Split point used for the reflected side in [`fe_residual`]. Any value
/// works for a modular form; a value other than 1 makes the two sides
/// independent computations.
pub const REFLECTED_SPLIT: f64 = 1.25;

/// Checks `Λ(s, a/c) = ω χ(ā) ε_a^{−δ} (c/a) c^{1−2s} Λ(1−s, −ā/c)` on
/// `s_grid`, with `Λ = γ L` for the given γ.
pub fn fe_residual(
    f: &QExpansion,
    frac: &TwistFraction,
    gamma: &GammaFactorSpec,
    delta: u8,
    mode: OmegaMode,
    s_grid: &[Complex64],
    cfg: &PrecisionConfig,
) -> Result<FeReport> {
    if s_grid.is_empty() {
        return Err(Error::InvalidInput("empty s-grid".into()));
    }
    if delta % 2 == 0 || delta > 3 {
        return Err(Error::InvalidInput(format!(
            "δ must be 1 or 3, got {delta}"
        )));
    }
    let lambda = f.weight().value();
    let reflected = frac.reflected();
    let mut ratios: Vec<Option<Complex64>> = Vec::with_capacity(s_grid.len());
    let mut skipped = Vec::new();
    for &s in s_grid {
        let lhs = gamma_ratio(gamma, lambda, s)? * natural_completion(f, frac, s, 1.0, cfg)?;
        let s_ref = 1.0 - s;
        let rhs = fe_factor(f, frac, delta, s)?
            * gamma_ratio(gamma, lambda, s_ref)?
            * natural_completion(f, &reflected, s_ref, REFLECTED_SPLIT, cfg)?;
        if rhs.norm() < 10.0 * cfg.target_tol {
            skipped.push(s);
            ratios.push(None);
        } else {
            ratios.push(Some(lhs / rhs));
        }
    }
    let mid = s_grid.len() / 2;
    let omega_hat = ratios[mid]
        .or_else(|| ratios.iter().flatten().next().copied())
        .ok_or_else(|| Error::IllConditioned("every grid point has |Λ| near zero".into()))?;
    let reference = match mode {
        OmegaMode::Fixed(w) => w,
        OmegaMode::Measured => omega_hat,
    };
    if !(reference.norm() > 0.0) || !reference.norm().is_finite() {
        return Err(Error::InvalidInput(
            "ω must be a nonzero finite number".into(),
        ));
    }
    let max_rel_dev = ratios
        .iter()
        .flatten()
        .map(|r| (r / reference - 1.0).norm())
        .fold(0.0, f64::max);
    Ok(FeReport {
        omega_hat,
        max_rel_dev,
        skipped_points: skipped,
    })
}

/// `|ω² fe(a/c, s) fe(−ā/c, 1−s) − 1|`: applying the functional equation
/// twice must return the starting value.
pub fn fe_involution_residual(
    f: &QExpansion,
    frac: &TwistFraction,
    delta: u8,
    omega: Complex64,
    s: Complex64,
) -> Result<f64> {
    let there = fe_factor(f, frac, delta, s)?;
    let back = fe_factor(f, &frac.reflected(), delta, 1.0 - s)?;
    Ok((omega * omega * there * back - 1.0).norm())
}

/// Everything needed to evaluate and test one twisted functional equation.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletedTwist {
    pub form: QExpansion,
    pub fraction: TwistFraction,
    pub gamma: GammaFactorSpec,
    pub omega: Complex64,
    pub delta: u8,
}

impl CompletedTwist {
    pub fn new(
        form: QExpansion,
        fraction: TwistFraction,
        gamma: GammaFactorSpec,
        omega: Complex64,
        delta: u8,
    ) -> Result<Self> {
        if !(omega.norm() > 0.0) || !omega.norm().is_finite() {
            return Err(Error::InvalidInput(
                "ω must be a nonzero finite number".into(),
            ));
        }
        if delta != 1 && delta != 3 {
            return Err(Error::InvalidInput(format!(
                "δ must be 1 or 3, got {delta}"
            )));
        }
        gamma.validate()?;
        Ok(Self {
            form,
            fraction,
            gamma,
            omega,
            delta,
        })
    }

    /// `γ(s) L_f(s, a/c)`.
    pub fn evaluate(&self, s: Complex64, cfg: &PrecisionConfig) -> Result<Complex64> {
        let natural = completed_twist(&self.form, &self.fraction, s, cfg)?;
        Ok(gamma_ratio(&self.gamma, self.form.weight().value(), s)? * natural)
    }

    pub fn fe_residual(&self, s_grid: &[Complex64], cfg: &PrecisionConfig) -> Result<FeReport> {
        fe_residual(
            &self.form,
            &self.fraction,
            &self.gamma,
            self.delta,
            OmegaMode::Fixed(self.omega),
            s_grid,
            cfg,
        )
    }
}

/// Residual report of [`hecke_variant_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeckeReport {
    pub residual: f64,
    pub skipped_points: Vec<Complex64>,
}

/// Ten points `e^{iφ}/H` on an arc, so both sides of the relation are
/// evaluated at imaginary parts near `1/(cH)`.
pub fn default_hecke_panel(h: f64) -> Vec<Complex64> {
    (0..10)
        .map(|k| {
            let phi = PI * (0.3 + 0.04 * k as f64);
            let r = 1.0 + 0.03 * (k as f64 - 4.5);
            Complex64::from_polar(r / h, phi)
        })
        .collect()
}

/// Max relative residual of
/// `f((−1/(H²z) + a)/c) = ω (−iHz)^ν χ(ā) ε_a^{−2ν} (c/a) f((z − ā)/c)`
/// over the panel.
pub fn hecke_variant_check(
    f: &QExpansion,
    frac: &TwistFraction,
    gamma: &GammaFactorSpec,
    omega: Complex64,
    z_panel: &[Complex64],
    cfg: &PrecisionConfig,
) -> Result<HeckeReport> {
    let GammaFactorSpec::Hecke { h, nu, .. } = gamma else {
        return Err(Error::InvalidInput(
            "hecke_variant_check needs a Hecke gamma factor".into(),
        ));
    };
    let c = frac.c as f64;
    let constant = omega
        * f.character().value(frac.a_bar)
        * eps_pow(frac.a, -(nu.two_lambda() as i64))?
        * jacobi_modified(frac.c, frac.a)? as f64;
    let mut residual = 0.0f64;
    let mut skipped = Vec::new();
    for &z in z_panel {
        if !(z.im > 0.0) {
            return Err(Error::Domain(format!(
                "panel point {z} not in the upper half-plane"
            )));
        }
        let left_arg = (-1.0 / (z * (h * h)) + frac.a as f64) / c;
        let right_arg = (z - frac.a_bar as f64) / c;
        let lhs = evaluate(f, left_arg, cfg)?;
        let rhs_f = evaluate(f, right_arg, cfg)?;
        let factor = constant * (Complex64::new(0.0, -*h) * z).powf(nu.value());
        let rhs = factor * rhs_f.value;
        let floor = cfg.target_tol * (lhs.magnitude + factor.norm() * rhs_f.magnitude);
        let scale = lhs.value.norm().max(rhs.norm());
        if scale <= floor {
            skipped.push(z);
            continue;
        }
        residual = residual.max((lhs.value - rhs).norm() / scale);
    }
    Ok(HeckeReport {
        residual,
        skipped_points: skipped,
    })
}

/// `ln Γ_C(s + (λ−1)/2)`, the log of the natural gamma factor.
pub fn natural_gamma_ln(lambda: f64, s: Complex64) -> Complex64 {
    ln_gamma_c(s + (lambda - 1.0) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::DirichletCharacterMod4N;
    use crate::arith::HalfIntegralWeight;

    fn toy() -> QExpansion {
        let coeffs = (1..=50)
            .map(|n| Complex64::new(1.0 / (n as f64), 0.0))
            .collect();
        QExpansion::new(
            4,
            HalfIntegralWeight::new(9).unwrap(),
            DirichletCharacterMod4N::trivial(4).unwrap(),
            coeffs,
        )
        .unwrap()
    }

    #[test]
    fn fraction_reflection() {
        let frac = TwistFraction::new(3, 8, 4).unwrap();
        assert_eq!(frac.a_bar, 3);
        let r = frac.reflected();
        assert_eq!((r.a, r.a_bar), (5, 5));
        assert_eq!(r.reflected().a, 3);
        let (a, b, c, d) = frac.matrix();
        assert_eq!(a * d - b * c, 1);
        assert!(TwistFraction::with_inverse(3, 8, 5, 4).is_err());
    }

    #[test]
    fn trivial_twist_is_untwisted() {
        let f = toy();
        let cfg = PrecisionConfig::default().with_tol(1e-3);
        let s = Complex64::new(6.0, 1.0);
        let zero = TwistFraction::new(0, 1, 4).unwrap();
        let direct: Complex64 = (1..=50)
            .map(|n| Complex64::new(1.0 / n as f64, 0.0) * (-s * (n as f64).ln()).exp())
            .sum();
        assert!((dirichlet_twist(&f, &zero, s, &cfg).unwrap() - direct).norm() < 1e-14);
        let t1 = dirichlet_twist(&f, &TwistFraction::new(3, 8, 4).unwrap(), s, &cfg).unwrap();
        let t2 = dirichlet_twist(&f, &TwistFraction::new(11, 8, 4).unwrap(), s, &cfg).unwrap();
        assert!((t1 - t2).norm() < 1e-14);
    }

    #[test]
    fn twist_refuses_slow_convergence() {
        let f = toy();
        let cfg = PrecisionConfig::default();
        let frac = TwistFraction::new(1, 4, 4).unwrap();
        assert!(matches!(
            dirichlet_twist(&f, &frac, Complex64::new(1.2, 0.0), &cfg),
            Err(Error::InsufficientCutoff { .. })
        ));
    }

    #[test]
    fn involution_needs_matching_omega() {
        let f = toy();
        let frac = TwistFraction::new(3, 8, 4).unwrap();
        let s = Complex64::new(0.3, 2.0);
        let good = fe_involution_residual(&f, &frac, 1, i_pow(4.5), s).unwrap();
        assert!(good < 1e-14, "{good}");
        let bad = fe_involution_residual(&f, &frac, 1, i_pow(5.5), s).unwrap();
        assert!(bad > 0.5);
    }

    #[test]
    fn completed_twist_rejects_nonmodular() {
        let f = toy();
        let frac = TwistFraction::new(1, 4, 4).unwrap();
        let cfg = PrecisionConfig::default();
        assert!(matches!(
            completed_twist(&f, &frac, Complex64::new(0.5, 0.0), &cfg),
            Err(Error::NotModular { .. })
        ));
    }
}
