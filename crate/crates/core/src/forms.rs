//! q-expansions of half-integral weight forms: construction from eta
//! quotients and theta, a coefficient file format, evaluation in the upper
//! half-plane, and pointwise modular transformation checks.
//!
//! Coefficients are stored in the analytic normalization
//! `f(z) = Σ f_n n^{(λ−1)/2} e(nz)`; the raw Fourier coefficient of `e(nz)`
//! is `a_n = f_n n^{(λ−1)/2}`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{eps_pow, gcd, jacobi_modified, DirichletCharacterMod4N, HalfIntegralWeight};
use crate::error::{Error, Result};
use crate::special::PrecisionConfig;

/// A truncated q-expansion with level, weight and character. Only the
/// nonzero coefficients up to the cutoff are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct QExpansion {
    level: u64,
    weight: HalfIntegralWeight,
    character: DirichletCharacterMod4N,
    cutoff: usize,
    constant: Complex64,
    /// `(n, f_n)` with `f_n != 0`, increasing in `n`.
    terms: Vec<(u64, Complex64)>,
    /// `(n, a_n)` aligned with `terms`.
    support: Vec<(u64, Complex64)>,
    /// Fitted `Σ_{n<=X} |f_n| <= B X^γ` as `(B, γ)`.
    growth: (f64, f64),
}

impl QExpansion {
    /// `coeffs[n-1] = f_n` in the analytic normalization.
    pub fn new(
        level: u64,
        weight: HalfIntegralWeight,
        character: DirichletCharacterMod4N,
        coeffs: Vec<Complex64>,
    ) -> Result<Self> {
        let cutoff = coeffs.len();
        let terms = coeffs
            .into_iter()
            .enumerate()
            .map(|(i, c)| (i as u64 + 1, c))
            .collect();
        Self::from_terms(
            level,
            weight,
            character,
            cutoff,
            terms,
            Complex64::new(0.0, 0.0),
        )
    }

    /// Builds from `(n, f_n)` pairs with increasing `n <= cutoff`; absent
    /// indices are zero.
    pub fn from_terms(
        level: u64,
        weight: HalfIntegralWeight,
        character: DirichletCharacterMod4N,
        cutoff: usize,
        terms: Vec<(u64, Complex64)>,
        constant: Complex64,
    ) -> Result<Self> {
        if level == 0 || level % 4 != 0 {
            return Err(Error::InvalidInput(format!(
                "level must be a positive multiple of 4, got {level}"
            )));
        }
        if character.modulus() != level {
            return Err(Error::InvalidInput(format!(
                "character modulus {} differs from level {level}",
                character.modulus()
            )));
        }
        if cutoff == 0 {
            return Err(Error::InvalidInput(
                "q-expansion needs cutoff M >= 1".into(),
            ));
        }
        let mut last = 0u64;
        for &(n, c) in &terms {
            if n <= last || n as usize > cutoff {
                return Err(Error::InvalidInput(format!(
                    "coefficient index {n} out of order or beyond cutoff {cutoff}"
                )));
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite coefficient at n = {n}"
                )));
            }
            last = n;
        }
        let terms: Vec<(u64, Complex64)> =
            terms.into_iter().filter(|(_, c)| c.norm() > 0.0).collect();
        let growth = fit_growth(&terms, cutoff)?;
        let shift = weight.half_shift();
        let support = terms
            .iter()
            .map(|&(n, c)| (n, c * (n as f64).powf(shift)))
            .collect();
        Ok(Self {
            level,
            weight,
            character,
            cutoff,
            constant,
            terms,
            support,
            growth,
        })
    }

    /// Builds from raw Fourier coefficients `raw[n] = a_n`, `n = 0..=M`.
    pub fn from_raw(
        level: u64,
        weight: HalfIntegralWeight,
        character: DirichletCharacterMod4N,
        raw: &[Complex64],
    ) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::InvalidInput(
                "need raw coefficients up to n >= 1".into(),
            ));
        }
        let shift = weight.half_shift();
        let terms = raw[1..]
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(i, a)| {
                let n = i as u64 + 1;
                (n, a * (n as f64).powf(-shift))
            })
            .collect();
        Self::from_terms(level, weight, character, raw.len() - 1, terms, raw[0])
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn weight(&self) -> HalfIntegralWeight {
        self.weight
    }

    pub fn character(&self) -> &DirichletCharacterMod4N {
        &self.character
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn constant(&self) -> Complex64 {
        self.constant
    }

    /// Nonzero `(n, f_n)` pairs.
    pub fn terms(&self) -> &[(u64, Complex64)] {
        &self.terms
    }

    /// Nonzero `(n, a_n)` pairs.
    pub fn support(&self) -> &[(u64, Complex64)] {
        &self.support
    }

    /// `f_n` (zero beyond the cutoff).
    pub fn coeff(&self, n: u64) -> Complex64 {
        match self.terms.binary_search_by_key(&n, |&(k, _)| k) {
            Ok(i) => self.terms[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// `a_n = f_n n^{(λ−1)/2}`.
    pub fn raw_coeff(&self, n: u64) -> Complex64 {
        if n == 0 {
            return self.constant;
        }
        self.coeff(n) * (n as f64).powf(self.weight.half_shift())
    }

    /// The same form with `f_n` replaced (used for perturbation controls).
    pub fn with_coeff(&self, n: u64, value: Complex64) -> Result<Self> {
        let mut terms: Vec<(u64, Complex64)> = self
            .terms
            .iter()
            .copied()
            .filter(|&(k, _)| k != n)
            .collect();
        terms.push((n, value));
        terms.sort_by_key(|&(k, _)| k);
        Self::from_terms(
            self.level,
            self.weight,
            self.character.clone(),
            self.cutoff.max(n as usize),
            terms,
            self.constant,
        )
    }

    /// The same form truncated to a smaller cutoff.
    pub fn truncated(&self, cutoff: usize) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .copied()
            .filter(|&(n, _)| n as usize <= cutoff)
            .collect();
        Self::from_terms(
            self.level,
            self.weight,
            self.character.clone(),
            cutoff.min(self.cutoff),
            terms,
            self.constant,
        )
    }

    /// `(B, γ)` with `Σ_{n<=X} |f_n| <= B X^γ` fitted on the stored range.
    pub fn growth(&self) -> (f64, f64) {
        self.growth
    }

    /// Bound on `Σ_{n>M} |f_n| n^{−σ}` by partial summation against the
    /// fitted growth; infinite when `σ <= γ`.
    pub fn dirichlet_tail(&self, sigma: f64) -> f64 {
        let (b, g) = self.growth;
        if sigma <= g {
            return f64::INFINITY;
        }
        sigma * b * (self.cutoff as f64).powf(g - sigma) / (sigma - g)
    }

    /// Largest `|a_n| / n^{λ/2}` on the stored range.
    fn raw_growth_constant(&self) -> f64 {
        let beta = self.weight.value() / 2.0;
        self.support
            .iter()
            .map(|&(n, a)| a.norm() / (n as f64).powf(beta))
            .fold(0.0, f64::max)
    }
}

/// Fits `Σ_{n<=X} |f_n| <= B X^γ`: γ from the growth between `M/4` and
/// `M` (at least 1/2, the generic size of a sum of bounded terms over a
/// sparse set), `B` as the worst ratio over the stored range.
/// Partial sums growing faster than `X^8` are rejected as implausible.
fn fit_growth(terms: &[(u64, Complex64)], cutoff: usize) -> Result<(f64, f64)> {
    if terms.is_empty() {
        return Ok((0.0, 0.0));
    }
    let m = cutoff as f64;
    let mut partial = 0.0;
    let mut quarter = 0.0;
    let mut checkpoints = Vec::with_capacity(terms.len());
    for &(n, c) in terms {
        partial += c.norm();
        if (n as f64) <= m / 4.0 {
            quarter = partial;
        }
        checkpoints.push((n as f64, partial));
    }
    let gamma = if quarter > 0.0 {
        ((partial / quarter).ln() / 4f64.ln()).max(0.5)
    } else {
        1.0
    };
    if gamma > 8.0 {
        return Err(Error::InvalidInput(format!(
            "coefficient partial sums grow like X^{gamma:.1}; not a plausible form"
        )));
    }
    let b = checkpoints
        .iter()
        .map(|&(x, s)| s / x.powf(gamma))
        .fold(0.0, f64::max);
    Ok((b, gamma))
}

/// Raw coefficients of θ(z) = Σ_{n∈Z} q^{n²}, for `n = 0..=m`.
pub fn theta_series(m: usize) -> Vec<i64> {
    let mut out = vec![0i64; m + 1];
    out[0] = 1;
    let mut k = 1usize;
    while k * k <= m {
        out[k * k] = 2;
        k += 1;
    }
    out
}

/// `∏_j η(d_j z)^{e_j} · θ(z)^t`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EtaQuotientSpec {
    pub factors: Vec<(u64, i32)>,
    pub theta_power: u32,
}

impl EtaQuotientSpec {
    /// Twice the weight: `Σ e_j + t`.
    pub fn two_weight(&self) -> i64 {
        self.factors.iter().map(|&(_, e)| e as i64).sum::<i64>() + self.theta_power as i64
    }

    /// The leading q-power `Σ d_j e_j / 24`.
    pub fn order_at_infinity(&self) -> Ratio<i64> {
        let num: i64 = self.factors.iter().map(|&(d, e)| d as i64 * e as i64).sum();
        Ratio::new(num, 24)
    }
}

/// `q^{offset} Σ_k coeffs[k] q^k`, with an exact rational offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSeries {
    pub offset: Ratio<i64>,
    pub coeffs: Vec<i128>,
}

/// Sparse `∏_{n>=1} (1 − q^{dn})` up to `q^m` via the pentagonal numbers.
fn euler_product_sparse(d: u64, m: usize) -> Vec<(usize, i128)> {
    let mut out = vec![(0usize, 1i128)];
    let mut k = 1i64;
    loop {
        let p1 = (d as i64 * k * (3 * k - 1) / 2) as usize;
        let p2 = (d as i64 * k * (3 * k + 1) / 2) as usize;
        if p1 > m {
            break;
        }
        let sign = if k % 2 == 0 { 1 } else { -1 };
        out.push((p1, sign));
        if p2 <= m {
            out.push((p2, sign));
        }
        k += 1;
    }
    out
}

fn overflow() -> Error {
    Error::PrecisionExhausted("eta quotient coefficient overflowed i128".into())
}

fn mul_sparse(dense: &[i128], sparse: &[(usize, i128)]) -> Result<Vec<i128>> {
    let m = dense.len();
    let mut out = vec![0i128; m];
    for &(k, c) in sparse {
        for i in 0..m - k.min(m) {
            let prod = dense[i].checked_mul(c).ok_or_else(overflow)?;
            out[i + k] = out[i + k].checked_add(prod).ok_or_else(overflow)?;
        }
    }
    Ok(out)
}

/// Divides by a sparse series with constant term 1.
fn div_sparse(dense: &[i128], sparse: &[(usize, i128)]) -> Result<Vec<i128>> {
    let mut out = dense.to_vec();
    for i in 0..out.len() {
        let mut acc = out[i];
        for &(k, c) in sparse.iter().skip(1) {
            if k > i {
                break;
            }
            acc = acc
                .checked_sub(c.checked_mul(out[i - k]).ok_or_else(overflow)?)
                .ok_or_else(overflow)?;
        }
        out[i] = acc;
    }
    Ok(out)
}

/// Exact raw expansion of an eta quotient times a power of θ, to `q^{offset+m}`.
pub fn eta_quotient_raw(spec: &EtaQuotientSpec, m: usize) -> Result<RawSeries> {
    if spec.factors.iter().any(|&(d, _)| d == 0) {
        return Err(Error::InvalidInput("eta factor with d = 0".into()));
    }
    let mut series = vec![0i128; m + 1];
    series[0] = 1;
    for &(d, e) in &spec.factors {
        let mut sparse = euler_product_sparse(d, m);
        sparse.sort_unstable();
        for _ in 0..e.unsigned_abs() {
            series = if e > 0 {
                mul_sparse(&series, &sparse)?
            } else {
                div_sparse(&series, &sparse)?
            };
        }
    }
    let theta: Vec<(usize, i128)> = theta_series(m)
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c != 0)
        .map(|(n, c)| (n, c as i128))
        .collect();
    for _ in 0..spec.theta_power {
        series = mul_sparse(&series, &theta)?;
    }
    Ok(RawSeries {
        offset: spec.order_at_infinity(),
        coeffs: series,
    })
}

/// The eta quotient as a [`QExpansion`] with `M` coefficients. Level and
/// character are fixture metadata supplied by the caller.
pub fn eta_quotient_expansion(
    spec: &EtaQuotientSpec,
    m: usize,
    level: u64,
    character: DirichletCharacterMod4N,
) -> Result<QExpansion> {
    let two_weight = spec.two_weight();
    if two_weight <= 0 || two_weight % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "eta quotient has weight {two_weight}/2, not a positive half-integer"
        )));
    }
    let order = spec.order_at_infinity();
    if order < Ratio::zero() {
        return Err(Error::InvalidInput(format!(
            "eta quotient has order {order} at infinity (not holomorphic there)"
        )));
    }
    if !order.is_integer() {
        return Err(Error::InvalidInput(format!(
            "eta quotient has fractional order {order} at infinity"
        )));
    }
    let offset = order.to_integer() as usize;
    let series = eta_quotient_raw(spec, m)?;
    let mut raw = vec![Complex64::new(0.0, 0.0); m + 1];
    for (k, &c) in series.coeffs.iter().enumerate() {
        if k + offset <= m {
            raw[k + offset] = Complex64::new(c.to_f64().ok_or_else(overflow)?, 0.0);
        }
    }
    let weight = HalfIntegralWeight::new(two_weight as u32)?;
    QExpansion::from_raw(level, weight, character, &raw)
}

/// θ(z) η(2z)^{12}, a cusp form of weight 13/2 on Γ0(4) with trivial
/// character.
pub fn fixture_theta_eta2_12(m: usize) -> Result<QExpansion> {
    let spec = EtaQuotientSpec {
        factors: vec![(2, 12)],
        theta_power: 1,
    };
    eta_quotient_expansion(&spec, m, 4, DirichletCharacterMod4N::trivial(4)?)
}

/// η(24z) = Σ_n (12/n) q^{n²}, a cusp form of weight 1/2 on Γ0(576) with
/// character (12/·).
pub fn fixture_eta24(m: usize) -> Result<QExpansion> {
    let spec = EtaQuotientSpec {
        factors: vec![(24, 1)],
        theta_power: 0,
    };
    eta_quotient_expansion(&spec, m, 576, DirichletCharacterMod4N::kronecker(12, 576)?)
}

/// θ as a weight-1/2 expansion on Γ0(4), including its constant term.
pub fn theta_expansion(m: usize) -> Result<QExpansion> {
    let raw: Vec<Complex64> = theta_series(m)
        .into_iter()
        .map(|c| Complex64::new(c as f64, 0.0))
        .collect();
    QExpansion::from_raw(
        4,
        HalfIntegralWeight::new(1)?,
        DirichletCharacterMod4N::trivial(4)?,
        &raw,
    )
}

/// Value of `f(z)` with the certified truncation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    pub tail_bound: f64,
    /// `Σ |a_n e(nz)|` over the summed terms, the scale of round-off.
    pub magnitude: f64,
}

/// Cutoff needed for the tail `A n^{λ/2} e^{−2πny}` summed beyond `M` to
/// fall below `target`.
fn tail_bound(a: f64, beta: f64, m: f64, y: f64) -> f64 {
    let r = (-2.0 * PI * y).exp();
    let first = a * (m + 1.0).powf(beta) * r.powf(m + 1.0);
    // ratio of consecutive terms beyond m is at most ((m+2)/(m+1))^β r
    let ratio = ((m + 2.0) / (m + 1.0)).powf(beta) * r;
    if ratio >= 1.0 {
        f64::INFINITY
    } else {
        first / (1.0 - ratio)
    }
}

/// `Σ_{n<=M} a_n e(nz)` plus a truncation bound from the empirical growth
/// of the stored coefficients. Fails when the bound exceeds
/// `target_tol` relative to the magnitude of the summed terms.
pub fn evaluate(f: &QExpansion, z: Complex64, cfg: &PrecisionConfig) -> Result<Evaluation> {
    if !(z.im > 0.0) {
        return Err(Error::Domain(format!(
            "evaluation point {z} not in the upper half-plane"
        )));
    }
    let two_pi_i_z = Complex64::new(0.0, 2.0 * PI) * z;
    let mut value = f.constant;
    let mut magnitude = f.constant.norm();
    for &(n, a) in &f.support {
        let term = a * (two_pi_i_z * n as f64).exp();
        value += term;
        magnitude += term.norm();
    }
    let beta = f.weight.value() / 2.0;
    let a = f.raw_growth_constant();
    let m = f.cutoff() as f64;
    let tail = tail_bound(a, beta, m, z.im);
    let allowed = cfg.target_tol * magnitude.max(f64::MIN_POSITIVE);
    if tail > allowed {
        let mut need = m.max(1.0);
        while tail_bound(a, beta, need, z.im) > allowed && need < 1e12 {
            need *= 1.25;
        }
        return Err(Error::InsufficientCutoff {
            have: f.cutoff(),
            required: need.ceil() as usize,
            what: format!("q-expansion tail at Im z = {:.3e}", z.im),
        });
    }
    Ok(Evaluation {
        value,
        tail_bound: tail,
        magnitude,
    })
}

/// `(√(cz+d))^{2λ}` with the principal square root.
pub fn automorphy_power(c: i64, d: i64, z: Complex64, two_lambda: u32) -> Complex64 {
    let root = (z * c as f64 + d as f64).sqrt();
    root.powu(two_lambda)
}

/// The multiplier `χ(d) ε_d^{−2λ} (c/d)` of `f(γz) = χ(d) ε_d^{−2λ} (c/d) (cz+d)^λ f(z)`.
pub fn multiplier(
    character: &DirichletCharacterMod4N,
    weight: HalfIntegralWeight,
    c: i64,
    d: i64,
) -> Result<Complex64> {
    let sym = jacobi_modified(c, d)? as f64;
    Ok(character.value(d) * eps_pow(d, -(weight.two_lambda() as i64))? * sym)
}

/// An element of Γ0(N) as `(a, b, c, d)`.
pub type Matrix = (i64, i64, i64, i64);

fn mobius(g: Matrix, z: Complex64) -> Complex64 {
    let (a, b, c, d) = g;
    (z * a as f64 + b as f64) / (z * c as f64 + d as f64)
}

fn check_matrix(g: Matrix, level: u64) -> Result<()> {
    let (a, b, c, d) = g;
    if a as i128 * d as i128 - b as i128 * c as i128 != 1 {
        return Err(Error::InvalidInput(format!(
            "{g:?} does not have determinant 1"
        )));
    }
    if c.rem_euclid(level as i64) != 0 {
        return Err(Error::InvalidInput(format!(
            "{g:?} is not in Gamma0({level})"
        )));
    }
    Ok(())
}

/// Points `z` with `Im z` and `Im γz` balanced near `1/|c|`.
pub fn balanced_panel(g: Matrix) -> Vec<Complex64> {
    let (_, _, c, d) = g;
    let offsets = [
        (-0.31, 0.9),
        (0.0, 1.0),
        (0.27, 1.1),
        (0.13, 0.8),
        (-0.12, 1.2),
    ];
    if c == 0 {
        return offsets
            .iter()
            .map(|&(x, y)| Complex64::new(x, 0.35 * y))
            .collect();
    }
    let cf = c as f64;
    offsets
        .iter()
        .map(|&(x, y)| Complex64::new(-d as f64 / cf + x / cf.abs(), y / cf.abs()))
        .collect()
}

/// `max_z |f(γz) − χ(d) ε_d^{−2λ} (c/d) (cz+d)^λ f(z)| / |RHS|` over the
/// balanced panel for `γ`.
pub fn transform_check(f: &QExpansion, g: Matrix, cfg: &PrecisionConfig) -> Result<f64> {
    check_matrix(g, f.level)?;
    let (_, _, c, d) = g;
    let mult = multiplier(&f.character, f.weight, c, d)?;
    let mut worst = 0.0f64;
    for z in balanced_panel(g) {
        let lhs = evaluate(f, mobius(g, z), cfg)?;
        let rhs_f = evaluate(f, z, cfg)?;
        let rhs = mult * automorphy_power(c, d, z, f.weight.two_lambda()) * rhs_f.value;
        let scale = rhs.norm().max(lhs.value.norm());
        if scale == 0.0 {
            continue;
        }
        worst = worst.max((lhs.value - rhs).norm() / scale);
    }
    Ok(worst)
}

/// Measured theta multiplier `θ(γz) / (√(cz+d) θ(z))`.
pub fn measured_theta_multiplier(
    g: Matrix,
    z: Complex64,
    cfg: &PrecisionConfig,
) -> Result<Complex64> {
    let (_, _, c, d) = g;
    let top = {
        let w = mobius(g, z);
        theta_value(w, cfg)?
    };
    let bottom = theta_value(z, cfg)?;
    Ok(top / ((z * c as f64 + d as f64).sqrt() * bottom))
}

/// θ(z) summed until the terms fall below round-off.
pub fn theta_value(z: Complex64, cfg: &PrecisionConfig) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(Error::Domain(format!("{z} not in the upper half-plane")));
    }
    let q_arg = Complex64::new(0.0, 2.0 * PI) * z;
    let mut total = Complex64::new(1.0, 0.0);
    let mut k = 1u64;
    loop {
        let term = (q_arg * (k * k) as f64).exp() * 2.0;
        total += term;
        if term.norm() < 1e-18 * total.norm() {
            return Ok(total);
        }
        k += 1;
        if k as usize > cfg.series_cutoff {
            return Err(Error::InsufficientCutoff {
                have: cfg.series_cutoff,
                required: k as usize * 2,
                what: "theta series".into(),
            });
        }
    }
}

/// The predicted theta multiplier `ε_d^{−1} (c/d)`.
pub fn theta_multiplier(g: Matrix) -> Result<Complex64> {
    let (_, _, c, d) = g;
    Ok(eps_pow(d, -1)? * jacobi_modified(c, d)? as f64)
}

fn compose(g1: Matrix, g2: Matrix) -> Matrix {
    let (a1, b1, c1, d1) = g1;
    let (a2, b2, c2, d2) = g2;
    (
        a1 * a2 + b1 * c2,
        a1 * b2 + b1 * d2,
        c1 * a2 + d1 * c2,
        c1 * b2 + d1 * d2,
    )
}

/// Theta cocycle residual: the measured multipliers at `γ1`, `γ2` and
/// `γ1γ2` must satisfy `ν(γ1γ2) = ν(γ1) ν(γ2) σ` with the branch factor
/// `σ = √(c₁₂z+d₁₂) / (√(c₁γ₂z+d₁) √(c₂z+d₂))`, and each must match the
/// predicted `ε_d^{−1}(c/d)`. Returns the largest deviation.
pub fn theta_cocycle_residual(g1: Matrix, g2: Matrix, cfg: &PrecisionConfig) -> Result<f64> {
    let g12 = compose(g1, g2);
    check_matrix(g1, 4)?;
    check_matrix(g2, 4)?;
    let z = balanced_panel(g12)[1];
    let w = mobius(g2, z);
    let nu1 = measured_theta_multiplier(g1, w, cfg)?;
    let nu2 = measured_theta_multiplier(g2, z, cfg)?;
    let nu12 = measured_theta_multiplier(g12, z, cfg)?;
    let root = |g: Matrix, z: Complex64| (z * g.2 as f64 + g.3 as f64).sqrt();
    let sigma = root(g12, z) / (root(g1, w) * root(g2, z));
    let mut worst = (nu12 - nu1 * nu2 * sigma).norm();
    for (g, nu) in [(g1, nu1), (g2, nu2), (g12, nu12)] {
        worst = worst.max((theta_multiplier(g)? - nu).norm());
    }
    Ok(worst)
}

/// A random element of Γ0(level) with `|c| <= level * cmax_mult`.
pub fn random_gamma0<R: rand::Rng>(rng: &mut R, level: u64, cmax_mult: i64) -> Matrix {
    loop {
        let k = rng.gen_range(1..=cmax_mult) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let c = k * level as i64;
        let d = rng.gen_range(-4 * c.abs()..=4 * c.abs());
        if d == 0 || gcd(c, d) != 1 {
            continue;
        }
        let a = crate::arith::mod_inverse(d, c.abs()).expect("coprime");
        let b = (a as i128 * d as i128 - 1) / c as i128;
        let g = (a, b as i64, c, d);
        if check_matrix(g, level).is_ok() {
            return g;
        }
    }
}

fn format_gaussian(v: Complex64) -> String {
    match (v.re == 0.0, v.im == 0.0) {
        (_, true) => format!("{}", v.re),
        (true, false) => format!("{}i", v.im),
        _ => {
            let sign = if v.im < 0.0 { "-" } else { "+" };
            format!("{}{}{}i", v.re, sign, v.im.abs())
        }
    }
}

fn parse_rational(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            (q != 0.0).then_some(p / q)
        }
        None => s.parse().ok(),
    }
}

/// Parses a Gaussian rational such as `1`, `-i`, `1/2-3/4i`, `0.5+2i`.
pub fn parse_gaussian(s: &str) -> Option<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    if let Some(body) = s.strip_suffix('i') {
        // split at the last sign that is not leading and not an exponent sign
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            if (bytes[idx] == b'+' || bytes[idx] == b'-') && !matches!(bytes[idx - 1], b'e' | b'E')
            {
                split = Some(idx);
                break;
            }
        }
        let (re, im) = match split {
            Some(idx) => (parse_rational(&body[..idx])?, &body[idx..]),
            None => (0.0, body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => parse_rational(other)?,
        };
        Some(Complex64::new(re, im))
    } else {
        Some(Complex64::new(parse_rational(&s)?, 0.0))
    }
}

/// Writes the coefficient file format: `level=`, `two_lambda=`,
/// `character=` (comma-separated value table), `cutoff=`, an optional
/// `sparse=1` declaring omitted indices zero, then `n re im` lines for the
/// nonzero `f_n`.
pub fn write_coefficients<W: Write>(f: &QExpansion, comments: &[&str], mut out: W) -> Result<()> {
    let mut text = String::new();
    for c in comments {
        let _ = writeln!(text, "# {c}");
    }
    let _ = writeln!(text, "level={}", f.level);
    let _ = writeln!(text, "two_lambda={}", f.weight.two_lambda());
    let table: Vec<String> = f
        .character
        .values()
        .iter()
        .map(|&v| format_gaussian(v))
        .collect();
    let _ = writeln!(text, "character={}", table.join(","));
    let _ = writeln!(text, "cutoff={}", f.cutoff());
    if f.terms.len() < f.cutoff {
        let _ = writeln!(text, "sparse=1");
    }
    for &(n, c) in &f.terms {
        let _ = writeln!(text, "{} {} {}", n, c.re, c.im);
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// Result of reading a coefficient file.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub form: QExpansion,
    pub warnings: Vec<String>,
}

/// Reads the coefficient file format. Indices missing below the cutoff
/// are zero, with a warning unless the file declares `sparse=1`.
pub fn ingest_coefficients<R: BufRead>(input: R) -> Result<Ingested> {
    let mut level = None;
    let mut two_lambda = None;
    let mut character = None;
    let mut cutoff = None;
    let mut sparse = false;
    let mut entries: Vec<(u64, Complex64)> = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: lineno, msg };
        if let Some((key, value)) = line.split_once('=') {
            if !entries.is_empty() {
                return Err(parse_err("header line after coefficient lines".into()));
            }
            let value = value.trim();
            match key.trim() {
                "level" => {
                    level = Some(value.parse::<u64>().map_err(|e| parse_err(e.to_string()))?)
                }
                "two_lambda" => {
                    let t = value.parse::<u32>().map_err(|e| parse_err(e.to_string()))?;
                    if t % 2 == 0 {
                        return Err(parse_err(format!("two_lambda must be odd, got {t}")));
                    }
                    two_lambda = Some(t)
                }
                "character" => {
                    let vals: Option<Vec<Complex64>> =
                        value.split(',').map(parse_gaussian).collect();
                    character = Some(vals.ok_or_else(|| parse_err("bad character value".into()))?);
                }
                "cutoff" => {
                    cutoff = Some(
                        value
                            .parse::<usize>()
                            .map_err(|e| parse_err(e.to_string()))?,
                    )
                }
                "sparse" => sparse = value == "1" || value == "true",
                other => return Err(parse_err(format!("unknown header key {other:?}"))),
            }
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(format!("expected `n re im`, got {line:?}")));
        }
        let n: u64 = parts[0]
            .parse()
            .map_err(|_| parse_err(format!("bad index {:?}", parts[0])))?;
        let re: f64 = parts[1]
            .parse()
            .map_err(|_| parse_err(format!("bad real part {:?}", parts[1])))?;
        let im: f64 = parts[2]
            .parse()
            .map_err(|_| parse_err(format!("bad imaginary part {:?}", parts[2])))?;
        if n == 0 {
            return Err(parse_err("indices start at n = 1".into()));
        }
        if let Some(&(last, _)) = entries.last() {
            if n <= last {
                return Err(parse_err(format!(
                    "index {n} does not increase past {last}"
                )));
            }
        }
        entries.push((n, Complex64::new(re, im)));
    }
    let missing = |what: &str| Error::Parse {
        line: 0,
        msg: format!("missing header {what}"),
    };
    let level = level.ok_or_else(|| missing("level"))?;
    let two_lambda = two_lambda.ok_or_else(|| missing("two_lambda"))?;
    let character = character.ok_or_else(|| missing("character"))?;
    let cutoff = cutoff.ok_or_else(|| missing("cutoff"))?;
    if let Some(&(last, _)) = entries.last() {
        if last as usize > cutoff {
            return Err(Error::Parse {
                line: 0,
                msg: format!("index {last} beyond cutoff {cutoff}"),
            });
        }
    }
    let absent = cutoff - entries.len();
    let chi = DirichletCharacterMod4N::new(level, character)?;
    let mut warnings = Vec::new();
    if absent > 0 && !sparse {
        warnings.push(format!(
            "{absent} of {cutoff} coefficients absent; treated as zero"
        ));
    }
    let form = QExpansion::from_terms(
        level,
        HalfIntegralWeight::new(two_lambda)?,
        chi,
        cutoff,
        entries,
        Complex64::new(0.0, 0.0),
    )?;
    Ok(Ingested { form, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_coefficients() {
        assert_eq!(theta_series(10), vec![1, 2, 0, 0, 2, 0, 0, 0, 0, 2, 0]);
    }

    #[test]
    fn eta_pentagonal() {
        let eta = eta_quotient_raw(
            &EtaQuotientSpec {
                factors: vec![(1, 1)],
                theta_power: 0,
            },
            12,
        )
        .unwrap();
        assert_eq!(eta.offset, Ratio::new(1, 24));
        assert_eq!(eta.coeffs, vec![1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1]);
        let empty = eta_quotient_raw(&EtaQuotientSpec::default(), 5).unwrap();
        assert_eq!(empty.coeffs, vec![1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn eta_division_inverts_multiplication() {
        let spec = EtaQuotientSpec {
            factors: vec![(2, 3), (1, -2), (2, -3), (1, 2)],
            theta_power: 0,
        };
        let raw = eta_quotient_raw(&spec, 40).unwrap();
        let mut expect = vec![0i128; 41];
        expect[0] = 1;
        assert_eq!(raw.coeffs, expect);
    }

    #[test]
    fn rejects_bad_quotients() {
        let neg = EtaQuotientSpec {
            factors: vec![(1, -1)],
            theta_power: 0,
        };
        assert!(
            eta_quotient_expansion(&neg, 10, 4, DirichletCharacterMod4N::trivial(4).unwrap())
                .is_err()
        );
        let frac = EtaQuotientSpec {
            factors: vec![(1, 1)],
            theta_power: 0,
        };
        assert!(
            eta_quotient_expansion(&frac, 10, 4, DirichletCharacterMod4N::trivial(4).unwrap())
                .is_err()
        );
    }

    #[test]
    fn gaussian_parsing() {
        let cases = [
            ("1", (1.0, 0.0)),
            ("-1", (-1.0, 0.0)),
            ("0", (0.0, 0.0)),
            ("i", (0.0, 1.0)),
            ("-i", (0.0, -1.0)),
            ("1/2-3/4i", (0.5, -0.75)),
            ("2+i", (2.0, 1.0)),
            ("1e-3+2e-2i", (1e-3, 2e-2)),
            ("-3i", (0.0, -3.0)),
        ];
        for (s, (re, im)) in cases {
            assert_eq!(parse_gaussian(s), Some(Complex64::new(re, im)), "{s}");
        }
        assert_eq!(parse_gaussian("x"), None);
        assert_eq!(parse_gaussian("1/0"), None);
    }

    #[test]
    fn theta_translation_and_inversion() {
        let cfg = PrecisionConfig::default();
        let theta = theta_expansion(400).unwrap();
        assert!(transform_check(&theta, (1, 1, 0, 1), &cfg).unwrap() < 1e-10);
        assert!(transform_check(&theta, (1, 0, 4, 1), &cfg).unwrap() < 1e-8);
    }

    #[test]
    fn single_coefficient_evaluation() {
        let cfg = PrecisionConfig::default();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 20];
        coeffs[0] = Complex64::new(1.0, 0.0);
        let f = QExpansion::new(
            4,
            HalfIntegralWeight::new(9).unwrap(),
            DirichletCharacterMod4N::trivial(4).unwrap(),
            coeffs,
        )
        .unwrap();
        let v = evaluate(&f, Complex64::new(0.0, 1.0), &cfg).unwrap();
        assert!((v.value.re - (-2.0 * PI).exp()).abs() < 1e-16);
    }
}
