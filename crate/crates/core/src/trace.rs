//! The geometric side of the half-integral weight Petersson trace formula
//! and the K-function built from it, both as a direct double sum and in the
//! analytically continued form obtained from the additive-twist functional
//! equations.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{
    i_pow, prime_divisors, sigma_twisted, DirichletCharacterMod4N, HalfIntegralWeight, SalieKernel,
    SymbolOrientation,
};
use crate::error::{Error, Result};
use crate::forms::QExpansion;
use crate::special::bessel::bessel_j;
use crate::special::gamma::GammaFactorSpec;
use crate::special::mellin::f_integral;
use crate::special::zeta::{zeta, zeta_without};
use crate::special::PrecisionConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceGeomInput {
    pub m: u64,
    pub n: u64,
    pub level: u64,
    pub chi: DirichletCharacterMod4N,
    pub weight: HalfIntegralWeight,
    pub c_max: u64,
}

impl TraceGeomInput {
    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidInput("m and n must be positive".into()));
        }
        if self.level == 0 || self.level % 4 != 0 || self.chi.modulus() != self.level {
            return Err(Error::InvalidInput(format!(
                "level {} must be a multiple of 4 matching the character modulus {}",
                self.level,
                self.chi.modulus()
            )));
        }
        if self.c_max < self.level {
            return Err(Error::InvalidInput(format!(
                "c_max = {} is below the level {}",
                self.c_max, self.level
            )));
        }
        if self.weight.two_lambda() < 5 {
            return Err(Error::Domain(format!(
                "the c-sum needs λ >= 5/2 to converge absolutely, got {}/2",
                self.weight.two_lambda()
            )));
        }
        Ok(())
    }
}

/// Partial sum of the geometric side with its tail diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometricSide {
    /// `δ_{n,m}` plus the c-sum up to `c_max`.
    pub partial_sum: Complex64,
    /// `C·c_max^{−1/2}` with C calibrated on the last decade.
    pub tail_estimate: f64,
    /// Log-log slope of the oscillation envelope over the last two decades.
    pub envelope_slope: f64,
    /// `(c, |oscillation|)` per window, for plotting.
    pub envelope: Vec<(f64, f64)>,
}

/// One term `(2π i^{−λ}/c) J_{λ−1}(4π√(mn)/c) S(m,n;c)` of the c-sum.
fn kloosterman_term(
    kernel: &SalieKernel,
    m: u64,
    n: u64,
    weight: HalfIntegralWeight,
    cfg: &PrecisionConfig,
) -> Result<Complex64> {
    let c = kernel.modulus() as f64;
    let lambda = weight.value();
    let x = 4.0 * PI * ((m as f64) * (n as f64)).sqrt() / c;
    let j = bessel_j(lambda - 1.0, x, cfg)?;
    Ok(kernel.evaluate(m as i64, n as i64) * i_pow(-lambda) * (2.0 * PI / c * j))
}

const WINDOWS_PER_DECADE: usize = 10;

/// Splits `[lo, hi]` into log-spaced windows and records the range of the
/// partial sums inside each.
struct EnvelopeTracker {
    edges: Vec<f64>,
    current: usize,
    lo: Complex64,
    hi: Complex64,
    seen: bool,
    windows: Vec<(f64, f64)>,
}

impl EnvelopeTracker {
    fn new(c_max: f64) -> Self {
        let decades = c_max.log10();
        let count = (decades * WINDOWS_PER_DECADE as f64).ceil() as usize;
        let edges = (0..=count)
            .map(|k| 10f64.powf(decades * k as f64 / count as f64))
            .collect();
        Self {
            edges,
            current: 0,
            lo: Complex64::new(f64::INFINITY, f64::INFINITY),
            hi: Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
            seen: false,
            windows: Vec::new(),
        }
    }

    fn flush(&mut self) {
        if self.seen {
            let centre = (self.edges[self.current] * self.edges[self.current + 1]).sqrt();
            self.windows.push((centre, (self.hi - self.lo).norm()));
        }
        self.lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        self.hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        self.seen = false;
    }

    fn push(&mut self, c: f64, value: Complex64) {
        while self.current + 2 < self.edges.len() && c >= self.edges[self.current + 1] {
            self.flush();
            self.current += 1;
        }
        self.lo = Complex64::new(self.lo.re.min(value.re), self.lo.im.min(value.im));
        self.hi = Complex64::new(self.hi.re.max(value.re), self.hi.im.max(value.im));
        self.seen = true;
    }

    fn finish(mut self) -> Vec<(f64, f64)> {
        self.flush();
        self.windows
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `δ_{n,m} + Σ_{level | c ≤ c_max} (2π i^{−λ}/c) J_{λ−1}(4π√(nm)/c) S_{χ,λ}(m,n;c)`.
pub fn geometric_side(input: &TraceGeomInput, cfg: &PrecisionConfig) -> Result<GeometricSide> {
    geometric_side_oriented(input, SymbolOrientation::CoverA, cfg)
}

pub fn geometric_side_oriented(
    input: &TraceGeomInput,
    orientation: SymbolOrientation,
    cfg: &PrecisionConfig,
) -> Result<GeometricSide> {
    input.validate()?;
    let mut out = geometric_sweep(input, &[(input.m, input.n)], orientation, cfg)?;
    Ok(out.remove(0))
}

/// The geometric side for several `(m, n)` pairs sharing one sweep over c,
/// so each Salié kernel is built once. `input.m`, `input.n` are ignored.
pub fn geometric_side_batch(
    input: &TraceGeomInput,
    pairs: &[(u64, u64)],
    cfg: &PrecisionConfig,
) -> Result<Vec<GeometricSide>> {
    for &(m, n) in pairs {
        TraceGeomInput {
            m,
            n,
            ..input.clone()
        }
        .validate()?;
    }
    geometric_sweep(input, pairs, SymbolOrientation::CoverA, cfg)
}

fn geometric_sweep(
    input: &TraceGeomInput,
    pairs: &[(u64, u64)],
    orientation: SymbolOrientation,
    cfg: &PrecisionConfig,
) -> Result<Vec<GeometricSide>> {
    let mut totals: Vec<Complex64> = pairs
        .iter()
        .map(|&(m, n)| Complex64::new(if m == n { 1.0 } else { 0.0 }, 0.0))
        .collect();
    let mut trackers: Vec<EnvelopeTracker> = pairs
        .iter()
        .map(|_| EnvelopeTracker::new(input.c_max as f64))
        .collect();
    let mut c = input.level;
    while c <= input.c_max {
        let kernel = SalieKernel::new(c, &input.chi, input.weight, orientation);
        for ((&(m, n), total), tracker) in pairs.iter().zip(&mut totals).zip(&mut trackers) {
            *total += kloosterman_term(&kernel, m, n, input.weight, cfg)?;
            tracker.push(c as f64, *total);
        }
        c += input.level;
    }
    let c_max = input.c_max as f64;
    Ok(totals
        .into_iter()
        .zip(trackers)
        .map(|(total, tracker)| {
            let envelope = tracker.finish();
            let last_two: Vec<(f64, f64)> = envelope
                .iter()
                .copied()
                .filter(|w| w.0 >= c_max / 100.0)
                .collect();
            // A tail C·c^{−1/2} moves by C·c^{−1/2}(1 − r^{−1/2}) across a
            // window of ratio r; invert that on the last decade.
            let shrink = 1.0 - 10f64.powf(-0.5 / WINDOWS_PER_DECADE as f64);
            let calibration = envelope
                .iter()
                .filter(|w| w.0 >= c_max / 10.0)
                .map(|w| w.1 * w.0.sqrt() / shrink)
                .fold(0.0, f64::max);
            GeometricSide {
                partial_sum: total,
                tail_estimate: calibration / c_max.sqrt(),
                envelope_slope: loglog_slope(&last_two),
                envelope,
            }
        })
        .collect())
}

/// Inputs of the K-function. The level `4N` and character come from `form`;
/// `weight` is the Petersson weight λ, with `2λ ≡ δ (mod 4)` where δ is the
/// form's functional-equation parameter.
#[derive(Debug, Clone)]
pub struct KFunctionInput {
    pub n: u64,
    pub form: QExpansion,
    pub s: Complex64,
    pub gamma: GammaFactorSpec,
    pub omega: Complex64,
    pub weight: HalfIntegralWeight,
    pub sigma1: f64,
}

impl KFunctionInput {
    fn validate_common(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        if self.weight.delta() != self.form.weight().delta() {
            return Err(Error::Domain(format!(
                "2λ = {} and the form's 2λ = {} differ mod 4",
                self.weight.two_lambda(),
                self.form.weight().two_lambda()
            )));
        }
        Ok(())
    }

    fn four_n(&self) -> u64 {
        self.form.level()
    }

    /// `ω i^{−λ}`.
    fn prefactor(&self) -> Complex64 {
        self.omega * i_pow(-self.weight.value())
    }

    fn f_at(&self, x: f64, cfg: &PrecisionConfig) -> Result<Complex64> {
        f_integral(self.weight, &self.gamma, self.s, x, self.sigma1, cfg)
    }
}

/// Truncation of the K-function sums. An evaluation whose estimated tail
/// exceeds `max_rel_tail · |K|` is rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KCutoffs {
    pub m_max: u64,
    pub c_max: u64,
    pub max_rel_tail: f64,
}

impl Default for KCutoffs {
    fn default() -> Self {
        Self {
            m_max: 1_000_000,
            c_max: 300_000,
            max_rel_tail: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KValue {
    pub value: Complex64,
    /// Estimated contribution of `m > m_max`.
    pub m_tail: f64,
    /// Bound on the contribution of `c > c_max` (zero for the continued form).
    pub c_tail: f64,
    /// Number of nonzero `f_m` used.
    pub terms: usize,
}

impl KValue {
    pub fn tail_estimate(&self) -> f64 {
        self.m_tail + self.c_tail
    }
}

fn npow(n: f64, s: Complex64) -> Complex64 {
    (-s * n.ln()).exp()
}

/// `Σ_{m > from} |f_m| m^{−σ}`: exact up to the form's cutoff, then the
/// partial-summation bound from the fitted coefficient growth.
fn coefficient_tail(form: &QExpansion, from: u64, sigma: f64) -> f64 {
    let known: f64 = form
        .terms()
        .iter()
        .filter(|&&(m, _)| m > from)
        .map(|&(m, f)| f.norm() * (m as f64).powf(-sigma))
        .sum();
    known + form.dirichlet_tail(sigma)
}

/// Rejects a tail above `rel·|K|`; the suggested cutoff assumes the tail
/// decays like `cutoff^{−decay}`.
fn check_tail(
    value: Complex64,
    tail: f64,
    rel: f64,
    have: u64,
    decay: f64,
    what: &str,
) -> Result<()> {
    let target = rel * value.norm();
    if tail > target || !tail.is_finite() {
        let factor = if decay > 0.0 && target > 0.0 && tail.is_finite() {
            (tail / target).powf(1.0 / decay)
        } else {
            f64::INFINITY
        };
        return Err(Error::InsufficientCutoff {
            have: have as usize,
            required: (have as f64 * factor).min(usize::MAX as f64).ceil() as usize,
            what: format!(
                "{what}: tail estimate {tail:.3e} against |K| = {:.3e}",
                value.norm()
            ),
        });
    }
    Ok(())
}

/// Inner sums `I(m) = Σ_{4N | c ≤ c_max} (2π i^{−λ}/c) J_{λ−1}(4π√(nm)/c) S(m,n;c)`
/// for every `m` in `ms`, with one FFT per modulus giving `S(·, n; c)`.
fn inner_sums(
    ms: &[u64],
    n: u64,
    four_n: u64,
    chi: &DirichletCharacterMod4N,
    weight: HalfIntegralWeight,
    c_max: u64,
    cfg: &PrecisionConfig,
) -> Result<Vec<Complex64>> {
    let mut planner = rustfft::FftPlanner::<f64>::new();
    let lambda = weight.value();
    let phase = i_pow(-lambda);
    let mut out = vec![Complex64::new(0.0, 0.0); ms.len()];
    let mut c = four_n;
    while c <= c_max {
        let kernel = SalieKernel::new(c, chi, weight, SymbolOrientation::CoverA);
        let mut spectrum = kernel.m_spectrum(n as i64);
        planner.plan_fft_inverse(c as usize).process(&mut spectrum);
        let cf = c as f64;
        for (&m, acc) in ms.iter().zip(out.iter_mut()) {
            let x = 4.0 * PI * ((m as f64) * (n as f64)).sqrt() / cf;
            let j = bessel_j(lambda - 1.0, x, cfg)?;
            *acc += spectrum[(m % c) as usize] * phase * (2.0 * PI / cf * j);
        }
        c += four_n;
    }
    Ok(out)
}

/// Bound on `Σ_{c > c_max, 4N | c}` of one inner-sum term, from
/// `|J_ν(x)| ≤ (x/2)^ν / Γ(ν+1)` and `|S| ≤ c`.
fn c_tail_bound(m: u64, n: u64, four_n: u64, lambda: f64, c_max: u64) -> f64 {
    let ln_gamma_lambda = crate::special::gamma::ln_gamma(Complex64::new(lambda, 0.0)).re;
    let y = 2.0 * PI * ((m as f64) * (n as f64)).sqrt();
    let c = c_max as f64;
    2.0 * PI * ((lambda - 1.0) * y.ln() - ln_gamma_lambda + (2.0 - lambda) * c.ln()).exp()
        / ((lambda - 2.0) * four_n as f64)
}

/// `K_n(s) = ζ^{(4N)}(2s) f_n n^{−s} + ζ^{(4N)}(2s) Σ_m f_m m^{−s} I(m)`
/// by direct double summation, for `Re s > 5/4`.
pub fn k_direct(input: &KFunctionInput, cuts: &KCutoffs, cfg: &PrecisionConfig) -> Result<KValue> {
    input.validate_common()?;
    let s = input.s;
    if !(s.re > 1.25) {
        return Err(Error::Domain(format!(
            "the direct K-sum needs Re s > 5/4, got {}",
            s.re
        )));
    }
    let lambda = input.weight.value();
    if input.weight.two_lambda() < 5 {
        return Err(Error::Domain(format!(
            "the c-sum needs λ > 2, got {lambda}"
        )));
    }
    let form = &input.form;
    if cuts.m_max as usize > form.cutoff() {
        return Err(Error::InsufficientCutoff {
            have: form.cutoff(),
            required: cuts.m_max as usize,
            what: "form coefficients below m_max".into(),
        });
    }
    let four_n = input.four_n();
    if cuts.c_max < four_n {
        return Err(Error::InsufficientCutoff {
            have: cuts.c_max as usize,
            required: four_n as usize,
            what: "c_max below the level".into(),
        });
    }
    let terms: Vec<(u64, Complex64)> = form
        .terms()
        .iter()
        .copied()
        .filter(|&(m, _)| m <= cuts.m_max)
        .collect();
    let ms: Vec<u64> = terms.iter().map(|t| t.0).collect();
    let inner = inner_sums(
        &ms,
        input.n,
        four_n,
        form.character(),
        input.weight,
        cuts.c_max,
        cfg,
    )?;
    let zeta_4n = zeta_without(2.0 * s, four_n)?;
    let mut acc = form.coeff(input.n) * npow(input.n as f64, s);
    let mut envelope = 0.0f64;
    let mut c_tail = 0.0;
    for (&(m, f), i_m) in terms.iter().zip(&inner) {
        acc += f * npow(m as f64, s) * i_m;
        envelope = envelope.max(i_m.norm() * (m as f64).powf(-0.25));
        c_tail += f.norm()
            * (m as f64).powf(-s.re)
            * c_tail_bound(m, input.n, four_n, lambda, cuts.c_max);
    }
    let value = zeta_4n * acc;
    let scale = zeta_4n.norm();
    let m_tail = scale * envelope * coefficient_tail(form, cuts.m_max, s.re - 0.25);
    let c_tail = scale * c_tail;
    let (_, growth) = form.growth();
    check_tail(
        value,
        c_tail,
        cuts.max_rel_tail,
        cuts.c_max,
        lambda - 2.0,
        "c_max",
    )?;
    check_tail(
        value,
        m_tail,
        cuts.max_rel_tail,
        cuts.m_max,
        s.re - 0.25 - growth,
        "m_max",
    )?;
    Ok(KValue {
        value,
        m_tail,
        c_tail,
        terms: terms.len(),
    })
}

fn check_continued_domain(input: &KFunctionInput) -> Result<()> {
    input.validate_common()?;
    let s = input.s;
    if (s - 1.0).norm() < 1e-12 {
        return Err(Error::pole(1.0, 0.0));
    }
    if !(s.re > 0.5 && s.re < -input.sigma1) {
        return Err(Error::Domain(format!(
            "the continued K-formula needs 1/2 < Re s < −σ₁ = {}, got {}",
            -input.sigma1, s.re
        )));
    }
    Ok(())
}

/// `ζ(2s−1) (4N)^{1−2s} ∏_{p|4N}(1 − 1/p)` without the zeta factor.
fn local_zero_mode(four_n: u64, s: Complex64) -> Complex64 {
    let local: f64 = prime_divisors(four_n)
        .into_iter()
        .map(|p| 1.0 - 1.0 / p as f64)
        .product();
    npow(four_n as f64, 2.0 * s - 1.0) * local
}

/// The continued form
/// `K_n(s) = ζ^{(4N)}(2s) f_n n^{−s}
///   + ω i^{−λ} f_n n^{s−1} ζ(2s−1) (4N)^{1−2s} ∏_{p|4N}(1 − 1/p) F_λ(s, 1)
///   + ω i^{−λ} Σ_{m≠n} f_m σ_{1−2s}(n−m; 4N) m^{s−1} F_λ(s, m/n)`,
/// valid for `1/2 < Re s < −σ₁`, `s ≠ 1`. Only `m_max` and `max_rel_tail`
/// of the cutoffs apply.
pub fn k_continued(
    input: &KFunctionInput,
    cuts: &KCutoffs,
    cfg: &PrecisionConfig,
) -> Result<KValue> {
    check_continued_domain(input)?;
    let (m_max, max_rel_tail) = (cuts.m_max, cuts.max_rel_tail);
    let s = input.s;
    let n = input.n;
    let four_n = input.four_n();
    let form = &input.form;
    if m_max as usize > form.cutoff() {
        return Err(Error::InsufficientCutoff {
            have: form.cutoff(),
            required: m_max as usize,
            what: "form coefficients below m_max".into(),
        });
    }
    let f_n = form.coeff(n);
    let pre = input.prefactor();
    let mut value = zeta_without(2.0 * s, four_n)? * f_n * npow(n as f64, s);
    if f_n.norm() > 0.0 {
        value += pre
            * f_n
            * npow(n as f64, 1.0 - s)
            * zeta(2.0 * s - 1.0)?
            * local_zero_mode(four_n, s)
            * input.f_at(1.0, cfg)?;
    }
    let (sum, envelope, terms) = off_diagonal_sum(input, m_max, false, cfg)?;
    value += pre * sum;
    let exponent = 1.0 - s.re - input.sigma1;
    let m_tail = pre.norm() * envelope * coefficient_tail(form, m_max, exponent);
    let (_, growth) = form.growth();
    check_tail(
        value,
        m_tail,
        max_rel_tail,
        m_max,
        exponent - growth,
        "m_max",
    )?;
    Ok(KValue {
        value,
        m_tail,
        c_tail: 0.0,
        terms,
    })
}

/// `Σ_{m ≤ m_max} f_m σ_{1−2s}(n−m; 4N) m^{s−1} F_λ(s, m/n)` over `m ≠ n`
/// (or over every m with `include_diagonal`, which hits σ at zero), with the
/// envelope constant of `|σ F| m^{−σ₁}`.
fn off_diagonal_sum(
    input: &KFunctionInput,
    m_max: u64,
    include_diagonal: bool,
    cfg: &PrecisionConfig,
) -> Result<(Complex64, f64, usize)> {
    let s = input.s;
    let n = input.n;
    let four_n = input.four_n();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut envelope = 0.0f64;
    let mut terms = 0;
    for &(m, f) in input.form.terms() {
        if m > m_max {
            break;
        }
        if m == n && !include_diagonal {
            continue;
        }
        let sigma = sigma_twisted(1.0 - 2.0 * s, n as i64 - m as i64, four_n)?;
        terms += 1;
        if sigma.norm() == 0.0 {
            continue;
        }
        let x = m as f64 / n as f64;
        let kernel = sigma * input.f_at(x, cfg)?;
        sum += f * npow(m as f64, 1.0 - s) * kernel;
        envelope = envelope.max(kernel.norm() * (m as f64).powf(-input.sigma1));
    }
    Ok((sum, envelope, terms))
}

/// `Res_{s=1} K_n = ω i^{−λ} (1/2) (4N)^{−1} ∏_{p|4N}(1 − 1/p) F_λ(1, 1) f_n`.
/// `input.s` is ignored.
pub fn residue_at_one(input: &KFunctionInput, cfg: &PrecisionConfig) -> Result<Complex64> {
    input.validate_common()?;
    let at_one = KFunctionInput {
        s: Complex64::new(1.0, 0.0),
        ..input.clone()
    };
    let f_n = input.form.coeff(input.n);
    Ok(input.prefactor()
        * 0.5
        * local_zero_mode(input.four_n(), at_one.s)
        * at_one.f_at(1.0, cfg)?
        * f_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::fixture_eta24;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn space_zero(c_max: u64) -> TraceGeomInput {
        TraceGeomInput {
            m: 1,
            n: 1,
            level: 4,
            chi: DirichletCharacterMod4N::trivial(4).unwrap(),
            weight: HalfIntegralWeight::new(5).unwrap(),
            c_max,
        }
    }

    #[test]
    fn loglog_slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..20)
            .map(|k| (k as f64, 3.0 * (k as f64).powf(-0.7)))
            .collect();
        assert!((loglog_slope(&pts) + 0.7).abs() < 1e-12);
        assert!(loglog_slope(&pts[..1]).is_nan());
    }

    #[test]
    fn geometric_side_rejects_bad_input() {
        let cfg = PrecisionConfig::default();
        let mut bad = space_zero(100);
        bad.c_max = 2;
        assert!(geometric_side(&bad, &cfg).is_err());
        let mut bad = space_zero(100);
        bad.weight = HalfIntegralWeight::new(3).unwrap();
        assert!(geometric_side(&bad, &cfg).is_err());
        let mut bad = space_zero(100);
        bad.level = 8;
        assert!(geometric_side(&bad, &cfg).is_err());
    }

    #[test]
    fn space_zero_sum_is_small_at_moderate_cutoff() {
        let cfg = PrecisionConfig::default();
        let input = space_zero(4000);
        let out = geometric_side_batch(&input, &[(1, 1), (1, 3)], &cfg).unwrap();
        for g in &out {
            assert!(g.partial_sum.norm() < 1e-2, "{:?}", g.partial_sum);
            assert!(g.partial_sum.norm() < g.tail_estimate, "{g:?}");
        }
        let single = geometric_side(&input, &cfg).unwrap();
        assert_eq!(single.partial_sum, out[0].partial_sum);
    }

    #[test]
    fn large_weight_sum_obeys_termwise_bound() {
        let cfg = PrecisionConfig::default();
        let mut input = space_zero(2000);
        input.weight = HalfIntegralWeight::new(21).unwrap();
        let out = geometric_side(&input, &cfg).unwrap();
        let lambda = input.weight.value();
        let bound: f64 = (1..=500)
            .map(|k| {
                let cc = 4.0 * k as f64;
                let x = 4.0 * PI / cc;
                let j = bessel_j(lambda - 1.0, x, &cfg).unwrap();
                2.0 * PI / cc * j.abs() * cc
            })
            .sum();
        assert!((out.partial_sum - 1.0).norm() <= bound);
    }

    fn single_term_form(two_lambda: u32) -> QExpansion {
        QExpansion::from_terms(
            4,
            HalfIntegralWeight::new(two_lambda).unwrap(),
            DirichletCharacterMod4N::trivial(4).unwrap(),
            10,
            vec![(1, c(1.0, 0.0))],
            c(0.0, 0.0),
        )
        .unwrap()
    }

    #[test]
    fn k_direct_of_single_coefficient_is_the_geometric_side() {
        let cfg = PrecisionConfig::default();
        let weight = HalfIntegralWeight::new(9).unwrap();
        let input = KFunctionInput {
            n: 1,
            form: single_term_form(9),
            s: c(1.5, 0.5),
            gamma: GammaFactorSpec::hecke(1.0, 1.0, 1).unwrap(),
            omega: c(1.0, 0.0),
            weight,
            sigma1: -3.0,
        };
        let cuts = KCutoffs {
            m_max: 10,
            c_max: 400,
            max_rel_tail: 1.0,
        };
        let k = k_direct(&input, &cuts, &cfg).unwrap();
        let geom = geometric_side(
            &TraceGeomInput {
                weight,
                c_max: 400,
                ..space_zero(400)
            },
            &cfg,
        )
        .unwrap();
        let expected = zeta_without(2.0 * input.s, 4).unwrap() * geom.partial_sum;
        assert!(
            (k.value - expected).norm() < 1e-13,
            "{} vs {expected}",
            k.value
        );
        assert_eq!(k.terms, 1);
    }

    fn eta_input(s: Complex64, n: u64) -> KFunctionInput {
        let weight = HalfIntegralWeight::new(17).unwrap();
        KFunctionInput {
            n,
            form: fixture_eta24(20_000).unwrap(),
            s,
            gamma: GammaFactorSpec::hecke(1.0, 1.0, 1).unwrap(),
            omega: i_pow(0.5),
            weight,
            sigma1: -3.5,
        }
    }

    #[test]
    fn k_direct_reports_the_binding_cutoff() {
        let cfg = PrecisionConfig::default();
        let input = eta_input(c(1.5, 0.0), 1);
        let cuts = KCutoffs {
            m_max: 20_000,
            c_max: 600,
            max_rel_tail: 1e-12,
        };
        match k_direct(&input, &cuts, &cfg) {
            Err(Error::InsufficientCutoff { what, required, .. }) => {
                assert!(what.starts_with("c_max"), "{what}");
                assert!(required > 600);
            }
            other => panic!("{other:?}"),
        }
        let too_far = KCutoffs {
            m_max: 50_000,
            ..cuts
        };
        assert!(matches!(
            k_direct(&input, &too_far, &cfg),
            Err(Error::InsufficientCutoff { .. })
        ));
        assert!(k_direct(&eta_input(c(1.2, 0.0), 1), &KCutoffs::default(), &cfg).is_err());
    }

    #[test]
    fn k_continued_domain_and_pole() {
        let cfg = PrecisionConfig::default();
        let cuts = KCutoffs {
            m_max: 10_000,
            ..KCutoffs::default()
        };
        assert!(matches!(
            k_continued(&eta_input(c(1.0, 0.0), 1), &cuts, &cfg),
            Err(Error::Pole { .. })
        ));
        assert!(k_continued(&eta_input(c(0.4, 0.0), 1), &cuts, &cfg).is_err());
        let mut wide = eta_input(c(1.4, 0.0), 1);
        wide.sigma1 = -1.2;
        assert!(k_continued(&wide, &cuts, &cfg).is_err());
        let mut wrong_weight = eta_input(c(1.4, 0.0), 1);
        wrong_weight.weight = HalfIntegralWeight::new(11).unwrap();
        assert!(k_continued(&wrong_weight, &cuts, &cfg).is_err());
    }

    #[test]
    fn k_continued_is_cutoff_stable_left_of_the_direct_range() {
        let cfg = PrecisionConfig::default().with_tol(1e-7);
        let input = eta_input(c(0.8, 2.0), 1);
        let short = KCutoffs {
            m_max: 2_000,
            ..KCutoffs::default()
        };
        let long = KCutoffs {
            m_max: 20_000,
            ..KCutoffs::default()
        };
        let a = k_continued(&input, &short, &cfg).unwrap();
        let b = k_continued(&input, &long, &cfg).unwrap();
        assert!(a.value.norm().is_finite());
        assert!((a.value - b.value).norm() <= 1e-6 * b.value.norm());
    }

    #[test]
    fn diagonal_term_is_excluded_from_the_sum() {
        let cfg = PrecisionConfig::default();
        let input = eta_input(c(1.4, 0.0), 1);
        let (without, _, _) = off_diagonal_sum(&input, 2_000, false, &cfg).unwrap();
        match off_diagonal_sum(&input, 2_000, true, &cfg) {
            Err(_) => {}
            Ok((with, _, _)) => assert!((with - without).norm() > 0.0),
        }
    }

    #[test]
    fn direct_and_continued_agree_at_moderate_cutoffs() {
        let cfg = PrecisionConfig::default();
        let input = eta_input(c(1.4, 1.0), 1);
        let cuts = KCutoffs {
            m_max: 20_000,
            c_max: 30_000,
            max_rel_tail: 1.0,
        };
        let d = k_direct(&input, &cuts, &cfg).unwrap();
        let k = k_continued(&input, &cuts, &cfg).unwrap();
        assert!(
            (d.value - k.value).norm() < 1e-4 * k.value.norm(),
            "{} {}",
            d.value,
            k.value
        );
    }

    #[test]
    fn residue_is_linear_in_the_coefficient() {
        let cfg = PrecisionConfig::default();
        let mut input = eta_input(c(1.4, 0.0), 1);
        input.gamma = GammaFactorSpec::hecke(1.0, 2.0, 1).unwrap();
        let base = residue_at_one(&input, &cfg).unwrap();
        assert!(base.norm() > 1e-6);
        let doubled = KFunctionInput {
            form: input.form.with_coeff(1, c(2.0, 0.0)).unwrap(),
            ..input.clone()
        };
        assert_eq!(residue_at_one(&doubled, &cfg).unwrap(), base * 2.0);
        let absent = KFunctionInput {
            n: 2,
            ..input.clone()
        };
        assert_eq!(residue_at_one(&absent, &cfg).unwrap(), c(0.0, 0.0));
        let mut hecke_one = input;
        hecke_one.weight = HalfIntegralWeight::new(9).unwrap();
        hecke_one.gamma = GammaFactorSpec::hecke(1.0, 1.0, 1).unwrap();
        hecke_one.sigma1 = -1.5;
        assert!(residue_at_one(&hecke_one, &cfg).unwrap().norm() < 1e-8);
    }
}
