//! Exact number-theoretic primitives: the theta-multiplier ingredients
//! (ε_d and the Shimura-extended Jacobi symbol), characters modulo 4N,
//! Ramanujan sums, the twisted divisor function of the Ramanujan-sum
//! Dirichlet series, and Salié sums with theta multiplier.
//!
//! Every optimized routine keeps a by-definition twin (`*_direct`) so the
//! two can be compared exactly.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::zeta::{zeta, zeta_without};

/// A half-integral weight λ = two_lambda / 2 with two_lambda odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HalfIntegralWeight {
    two_lambda: u32,
}

impl HalfIntegralWeight {
    pub fn new(two_lambda: u32) -> Result<Self> {
        if two_lambda % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "two_lambda must be odd, got {two_lambda}"
            )));
        }
        Ok(Self { two_lambda })
    }

    pub fn two_lambda(self) -> u32 {
        self.two_lambda
    }

    pub fn value(self) -> f64 {
        self.two_lambda as f64 / 2.0
    }

    /// The odd residue 2λ mod 4.
    pub fn delta(self) -> u32 {
        self.two_lambda % 4
    }

    /// `(λ − 1)/2`, the shift between the analytic and raw normalizations.
    pub fn half_shift(self) -> f64 {
        (self.value() - 1.0) / 2.0
    }
}

/// `i^{λ}` on the principal branch, `e^{iπλ/2}`.
pub fn i_pow(lambda: f64) -> Complex64 {
    Complex64::from_polar(1.0, PI * lambda / 2.0)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

/// Prime factorization by trial division, as (p, exponent) pairs in
/// increasing order.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut n = n;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn radical(n: u64) -> u64 {
    prime_divisors(n).into_iter().product::<u64>().max(1)
}

fn ord_p(mut n: u64, p: u64) -> u32 {
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

/// `ε_d`: 1 for d ≡ 1 (mod 4), i for d ≡ 3 (mod 4).
pub fn eps(d: i64) -> Result<Complex64> {
    Ok(match eps_quarter_turns(d)? {
        0 => Complex64::new(1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    })
}

/// ε_d as a power of i (0 or 1).
pub fn eps_quarter_turns(d: i64) -> Result<u8> {
    match d.rem_euclid(4) {
        1 => Ok(0),
        3 => Ok(1),
        _ => Err(Error::InvalidInput(format!("eps needs odd d, got {d}"))),
    }
}

/// `ε_d^k` for any integer k.
pub fn eps_pow(d: i64, k: i64) -> Result<Complex64> {
    let q = eps_quarter_turns(d)? as i64 * k;
    Ok(i_quarter(q))
}

fn i_quarter(q: i64) -> Complex64 {
    match q.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Classical Jacobi symbol (a/n) for odd n > 0.
pub fn jacobi(a: i64, n: i64) -> Result<i8> {
    if n <= 0 || n % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "Jacobi symbol needs odd positive modulus, got {n}"
        )));
    }
    Ok(jacobi_unchecked(a.rem_euclid(n) as u64, n as u64))
}

/// Binary Jacobi algorithm; `n` odd positive, `a < n`.
pub(crate) fn jacobi_unchecked(mut a: u64, mut n: u64) -> i8 {
    let mut t = 1i8;
    a %= n;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && matches!(n % 8, 3 | 5) {
            t = -t;
        }
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol (a/n) for arbitrary integers.
pub fn kronecker(a: i64, n: i64) -> i8 {
    if n == 0 {
        return if a.abs() == 1 { 1 } else { 0 };
    }
    let mut result = 1i8;
    let mut n = n;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let tz = n.trailing_zeros();
    if tz > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if tz % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            result = -result;
        }
        n >>= tz;
    }
    if n == 1 {
        return result;
    }
    result * jacobi_unchecked(a.rem_euclid(n) as u64, n as u64)
}

/// Shimura's extension of the Jacobi symbol `(c/d)` to odd `d` of either
/// sign: `(c/|d|)`, negated when both `c` and `d` are negative, and
/// `(0/±1) = 1`.
pub fn jacobi_modified(c: i64, d: i64) -> Result<i8> {
    if d % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "modified Jacobi symbol needs odd d, got ({c}/{d})"
        )));
    }
    let base = jacobi(c, d.abs())?;
    Ok(if c < 0 && d < 0 { -base } else { base })
}

/// Inverse of `a` modulo `c`, in `[0, c)`.
pub fn mod_inverse(a: i64, c: i64) -> Result<i64> {
    if c <= 0 {
        return Err(Error::InvalidInput(format!(
            "modulus must be positive, got {c}"
        )));
    }
    if c == 1 {
        return Ok(0);
    }
    let (mut r0, mut r1) = (a.rem_euclid(c) as i128, c as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return Err(Error::NoInverse { a, c });
    }
    Ok(s0.rem_euclid(c as i128) as i64)
}

/// A Dirichlet character modulo 4N stored as a value table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletCharacterMod4N {
    modulus: u64,
    values: Vec<Complex64>,
}

impl DirichletCharacterMod4N {
    /// Validates the table: zero exactly off the units, unimodular and
    /// multiplicative on the units.
    pub fn new(modulus: u64, values: Vec<Complex64>) -> Result<Self> {
        if modulus == 0 || modulus % 4 != 0 {
            return Err(Error::InvalidInput(format!(
                "character modulus must be a positive multiple of 4, got {modulus}"
            )));
        }
        if values.len() != modulus as usize {
            return Err(Error::InvalidInput(format!(
                "character table has {} entries, expected {modulus}",
                values.len()
            )));
        }
        let tol = 1e-9;
        for (a, v) in values.iter().enumerate() {
            let unit = gcd(a as i64, modulus as i64) == 1;
            if unit && (v.norm() - 1.0).abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "chi({a}) = {v} is not a root of unity"
                )));
            }
            if !unit && v.norm() > tol {
                return Err(Error::InvalidInput(format!(
                    "chi({a}) must vanish since gcd({a},{modulus}) > 1"
                )));
            }
        }
        let m = modulus as usize;
        for a in 0..m {
            for b in a..m {
                let lhs = values[a * b % m];
                let rhs = values[a] * values[b];
                if (lhs - rhs).norm() > tol {
                    return Err(Error::InvalidInput(format!(
                        "character table not multiplicative at ({a},{b})"
                    )));
                }
            }
        }
        Ok(Self { modulus, values })
    }

    pub fn trivial(modulus: u64) -> Result<Self> {
        let values = (0..modulus)
            .map(|a| {
                if gcd(a as i64, modulus as i64) == 1 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Self::new(modulus, values)
    }

    /// The Kronecker character `a ↦ (D/a)` lifted to the given modulus.
    pub fn kronecker(d: i64, modulus: u64) -> Result<Self> {
        let values = (0..modulus)
            .map(|a| {
                if gcd(a as i64, modulus as i64) == 1 {
                    Complex64::new(kronecker(d, a as i64) as f64, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Self::new(modulus, values)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, a: i64) -> Complex64 {
        self.values[a.rem_euclid(self.modulus as i64) as usize]
    }

    pub fn is_trivial(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.norm() < 1e-12 || (v - Complex64::new(1.0, 0.0)).norm() < 1e-12)
    }

    /// Value as an exact Gaussian integer, when it is one of 0, ±1, ±i.
    pub fn gaussian_value(&self, a: i64) -> Option<(i64, i64)> {
        let v = self.value(a);
        let (re, im) = (v.re.round(), v.im.round());
        if (v.re - re).abs() < 1e-12 && (v.im - im).abs() < 1e-12 {
            Some((re as i64, im as i64))
        } else {
            None
        }
    }
}

/// Ramanujan sum `r(n;q) = Σ_{d | (n,q)} μ(q/d) d`.
pub fn ramanujan_sum(n: i64, q: u64) -> i64 {
    assert!(q >= 1, "ramanujan_sum needs q >= 1");
    let g = gcd(n, q as i64) as u64;
    let mut total = 0i64;
    let mut d = 1u64;
    while d * d <= g {
        if g % d == 0 {
            total += mobius(q / d) * d as i64;
            let e = g / d;
            if e != d {
                total += mobius(q / e) * e as i64;
            }
        }
        d += 1;
    }
    total
}

/// Ramanujan sum by direct summation of `e(an/q)` over units, rounded.
pub fn ramanujan_sum_direct(n: i64, q: u64) -> i64 {
    let qi = q as i64;
    let s: f64 = (1..=qi)
        .filter(|&a| gcd(a, qi) == 1)
        .map(|a| (2.0 * PI * ((a * n).rem_euclid(qi)) as f64 / q as f64).cos())
        .sum();
    s.round() as i64
}

fn check_four_n(four_n: u64) -> Result<()> {
    if four_n == 0 || four_n % 4 != 0 {
        return Err(Error::InvalidInput(format!(
            "4N must be a positive multiple of 4, got {four_n}"
        )));
    }
    Ok(())
}

/// The exact divisibility gate `4N / ∏_{p | 4N} p` divides `n`.
pub fn sigma_gate(n: i64, four_n: u64) -> bool {
    let need = four_n / radical(four_n);
    n.unsigned_abs() % need == 0
}

fn cpow(p: u64, s: Complex64) -> Complex64 {
    (s * (p as f64).ln()).exp()
}

/// σ_s(n;4N), the twisted divisor sum in the closed form of the Ramanujan
/// sum Dirichlet series. Negative `n` is evaluated at `|n|`.
pub fn sigma_twisted(s: Complex64, n: i64, four_n: u64) -> Result<Complex64> {
    check_four_n(four_n)?;
    if n == 0 {
        return Err(Error::InvalidInput(
            "sigma_twisted is undefined at n = 0; use zero_mode_constant".into(),
        ));
    }
    if !sigma_gate(n, four_n) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let n_abs = n.unsigned_abs();
    let mut acc = Complex64::new(1.0, 0.0);
    for (p, e) in factorize(n_abs) {
        if four_n % p != 0 {
            acc *= geometric_block(p, s, 0, e);
        }
    }
    for (p, f) in factorize(four_n) {
        let e = ord_p(n_abs, p);
        acc *= bad_prime_factor(p, s, e, f);
    }
    Ok(acc)
}

/// `Σ_{j=lo}^{hi} p^{js}`.
fn geometric_block(p: u64, s: Complex64, lo: u32, hi: u32) -> Complex64 {
    let ps = cpow(p, s);
    let mut term = cpow(p, s * lo as f64);
    let mut total = Complex64::new(0.0, 0.0);
    for _ in lo..=hi {
        total += term;
        term *= ps;
    }
    total
}

/// `((1 − p^{s−1}) p^{(e+1)s} − (1 − p^{−1}) p^{fs}) / (p^s − 1)`, with the
/// removable singularity at `p^s = 1` taken through the equivalent finite
/// sum `(1 − 1/p) Σ_{k=f}^{e} p^{ks} − p^{(e+1)s − 1}`.
fn bad_prime_factor(p: u64, s: Complex64, e: u32, f: u32) -> Complex64 {
    let pf = p as f64;
    let ps = cpow(p, s);
    let denom = ps - 1.0;
    if denom.norm() > 1e-6 {
        let num = (1.0 - ps / pf) * cpow(p, s * (e + 1) as f64)
            - (1.0 - 1.0 / pf) * cpow(p, s * f as f64);
        num / denom
    } else {
        let block = if e >= f {
            geometric_block(p, s, f, e)
        } else {
            Complex64::new(0.0, 0.0)
        };
        block * (1.0 - 1.0 / pf) - cpow(p, s * (e + 1) as f64) / pf
    }
}

/// `(4N)^{1−2s} ∏_{p|4N}(1 − p^{−1}) ζ(2s−1) / ζ^{(4N)}(2s)`, the value of
/// `Σ_{4N | q} φ(q) q^{−2s}`.
pub fn zero_mode_constant(s: Complex64, four_n: u64) -> Result<Complex64> {
    check_four_n(four_n)?;
    if (s - 1.0).norm() < 1e-12 {
        return Err(Error::pole(1.0, 0.0));
    }
    let local: f64 = prime_divisors(four_n)
        .into_iter()
        .map(|p| 1.0 - 1.0 / p as f64)
        .product();
    let front = ((1.0 - 2.0 * s) * (four_n as f64).ln()).exp() * local;
    Ok(front * zeta(2.0 * s - 1.0)? / zeta_without(2.0 * s, four_n)?)
}

/// Which quadratic symbol enters the Salié sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SymbolOrientation {
    /// `(c/a)` with Shimura's convention; the orientation of the
    /// functional equation.
    #[default]
    CoverA,
    /// `(a/c)` read as a Kronecker symbol (c is even).
    AoverC,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SalieSumInput {
    pub m: i64,
    pub n: i64,
    pub c: u64,
    pub chi: DirichletCharacterMod4N,
    pub weight: HalfIntegralWeight,
}

impl SalieSumInput {
    fn validate(&self) -> Result<()> {
        if self.c == 0 || self.c % self.chi.modulus() != 0 {
            return Err(Error::InvalidInput(format!(
                "Salie sum modulus {} is not a multiple of 4N = {}",
                self.c,
                self.chi.modulus()
            )));
        }
        Ok(())
    }
}

/// The quadratic symbol attached to the unit `a` modulo `c`.
fn unit_symbol(a: u64, c: u64, orientation: SymbolOrientation) -> i8 {
    match orientation {
        SymbolOrientation::CoverA => jacobi_unchecked(c % a, a),
        SymbolOrientation::AoverC => kronecker(a as i64, c as i64),
    }
}

/// Salié sum `S_{χ,λ}(m,n;c) = Σ_{a mod c, (a,c)=1} χ(a) (c/a) ε_a^{2λ} e((am + ān)/c)`
/// in the default orientation, via precomputed inverse and phase tables.
pub fn salie_sum(input: &SalieSumInput) -> Result<Complex64> {
    salie_sum_oriented(input, SymbolOrientation::CoverA)
}

pub fn salie_sum_oriented(
    input: &SalieSumInput,
    orientation: SymbolOrientation,
) -> Result<Complex64> {
    input.validate()?;
    let kernel = SalieKernel::new(input.c, &input.chi, input.weight, orientation);
    Ok(kernel.evaluate(input.m, input.n))
}

/// By-definition Salié sum: one `mod_inverse`, `eps_pow` and
/// `jacobi_modified` call per unit, summed in the given order of `a`.
pub fn salie_sum_direct(
    input: &SalieSumInput,
    orientation: SymbolOrientation,
    order: &[u64],
) -> Result<Complex64> {
    input.validate()?;
    let c = input.c as i64;
    let mut total = Complex64::new(0.0, 0.0);
    for &a in order {
        let a = a as i64;
        if gcd(a, c) != 1 {
            continue;
        }
        let abar = mod_inverse(a, c)?;
        let sym = match orientation {
            SymbolOrientation::CoverA => jacobi_modified(c, a)?,
            SymbolOrientation::AoverC => kronecker(a, c),
        } as f64;
        let e = eps_pow(a, input.weight.two_lambda() as i64)?;
        let phase = 2.0 * PI * ((a * input.m + abar * input.n).rem_euclid(c)) as f64 / c as f64;
        total += input.chi.value(a) * sym * e * Complex64::from_polar(1.0, phase);
    }
    Ok(total)
}

/// A finite sum `Σ_k coeffs[k] e(k/modulus)` with Gaussian-integer
/// coefficients, the exact shape of a Salié sum whose character takes
/// values in {0, ±1, ±i}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicSum {
    pub modulus: u64,
    pub coeffs: Vec<(i64, i64)>,
}

impl CyclotomicSum {
    pub fn to_complex(&self) -> Complex64 {
        let c = self.modulus as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &(re, im))| re != 0 || im != 0)
            .map(|(k, &(re, im))| {
                Complex64::new(re as f64, im as f64)
                    * Complex64::from_polar(1.0, 2.0 * PI * k as f64 / c)
            })
            .sum()
    }
}

fn gauss_mul(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn quarter_gauss(q: i64) -> (i64, i64) {
    match q.rem_euclid(4) {
        0 => (1, 0),
        1 => (0, 1),
        2 => (-1, 0),
        _ => (0, -1),
    }
}

/// Exact Salié sum by definition (per-unit `mod_inverse` and symbol calls).
/// `None` when the character leaves the Gaussian integers.
pub fn salie_sum_exact_direct(
    input: &SalieSumInput,
    orientation: SymbolOrientation,
) -> Result<Option<CyclotomicSum>> {
    input.validate()?;
    let c = input.c as i64;
    let mut coeffs = vec![(0i64, 0i64); input.c as usize];
    for a in 1..c {
        if gcd(a, c) != 1 {
            continue;
        }
        let Some(chi) = input.chi.gaussian_value(a) else {
            return Ok(None);
        };
        let abar = mod_inverse(a, c)?;
        let sym = match orientation {
            SymbolOrientation::CoverA => jacobi_modified(c, a)?,
            SymbolOrientation::AoverC => kronecker(a, c),
        } as i64;
        let q = eps_quarter_turns(a)? as i64 * input.weight.two_lambda() as i64;
        let w = gauss_mul(chi, quarter_gauss(q));
        let k = (a * input.m + abar * input.n).rem_euclid(c) as usize;
        coeffs[k].0 += sym * w.0;
        coeffs[k].1 += sym * w.1;
    }
    Ok(Some(CyclotomicSum {
        modulus: input.c,
        coeffs,
    }))
}

/// Exact Salié sum through the table-driven kernel.
pub fn salie_sum_exact(
    input: &SalieSumInput,
    orientation: SymbolOrientation,
) -> Result<Option<CyclotomicSum>> {
    input.validate()?;
    let kernel = SalieKernel::new(input.c, &input.chi, input.weight, orientation);
    Ok(kernel.exact(input.m, input.n))
}

/// Per-modulus tables for repeated Salié sums at one `c`: the units, their
/// inverses (batch inversion), the unit weights, and the `e(k/c)` table.
///
/// Units and symbols come from one linear sieve over `[1, c)`: the symbol is
/// completely multiplicative in `a` for either orientation, so it is only
/// evaluated at primes.
#[derive(Debug, Clone)]
pub struct SalieKernel {
    c: u64,
    units: Vec<u64>,
    inverses: Vec<u64>,
    symbols: Vec<i8>,
    weights: Vec<Complex64>,
    chi: DirichletCharacterMod4N,
    two_lambda: i64,
    roots: Vec<Complex64>,
}

/// Units modulo `c` in increasing order with `a ↦ symbol(a)` on each.
fn sieve_units(c: u64, orientation: SymbolOrientation) -> (Vec<u64>, Vec<i8>) {
    if c == 1 {
        return (Vec::new(), Vec::new());
    }
    let len = c as usize;
    // 0 marks a non-unit; otherwise the symbol value ±1.
    let mut sym = vec![0i8; len];
    let mut composite = vec![false; len];
    let mut primes: Vec<usize> = Vec::new();
    sym[1] = 1;
    for i in 2..len {
        if !composite[i] {
            primes.push(i);
            if c % i as u64 != 0 {
                sym[i] = unit_symbol(i as u64, c, orientation);
            }
        }
        for &p in &primes {
            let ip = i * p;
            if ip >= len {
                break;
            }
            composite[ip] = true;
            sym[ip] = sym[i] * sym[p];
            if i % p == 0 {
                break;
            }
        }
    }
    let units: Vec<u64> = (1..c).filter(|&a| sym[a as usize] != 0).collect();
    let symbols = units.iter().map(|&a| sym[a as usize]).collect();
    (units, symbols)
}

/// `e(k/c)` for `k < c`, resynchronised with an exact `sin_cos` every 64 steps.
fn root_table(c: u64) -> Vec<Complex64> {
    let step = 2.0 * PI / c as f64;
    let rot = Complex64::from_polar(1.0, step);
    let mut out = Vec::with_capacity(c as usize);
    let mut z = Complex64::new(1.0, 0.0);
    for k in 0..c {
        if k % 64 == 0 {
            z = Complex64::from_polar(1.0, step * k as f64);
        }
        out.push(z);
        z *= rot;
    }
    out
}

impl SalieKernel {
    pub fn new(
        c: u64,
        chi: &DirichletCharacterMod4N,
        weight: HalfIntegralWeight,
        orientation: SymbolOrientation,
    ) -> Self {
        let (units, symbols) = sieve_units(c, orientation);
        let inverses = batch_inverse(&units, c);
        let two_lambda = weight.two_lambda() as i64;
        let weights = units
            .iter()
            .zip(&symbols)
            .map(|(&a, &sym)| {
                let q = if a % 4 == 3 { two_lambda } else { 0 };
                chi.value(a as i64) * i_quarter(q) * sym as f64
            })
            .collect();
        Self {
            c,
            units,
            inverses,
            symbols,
            weights,
            chi: chi.clone(),
            two_lambda,
            roots: root_table(c),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.c
    }

    pub fn evaluate(&self, m: i64, n: i64) -> Complex64 {
        let c = self.c;
        let mr = m.rem_euclid(c as i64) as u64;
        let nr = n.rem_euclid(c as i64) as u64;
        let mut total = Complex64::new(0.0, 0.0);
        for ((&a, &abar), w) in self.units.iter().zip(&self.inverses).zip(&self.weights) {
            let k = (a * mr + abar * nr) % c;
            total += w * self.roots[k as usize];
        }
        total
    }

    pub fn exact(&self, m: i64, n: i64) -> Option<CyclotomicSum> {
        let c = self.c;
        let mr = m.rem_euclid(c as i64) as u64;
        let nr = n.rem_euclid(c as i64) as u64;
        let mut coeffs = vec![(0i64, 0i64); c as usize];
        for ((&a, &abar), &sym) in self.units.iter().zip(&self.inverses).zip(&self.symbols) {
            let cv = self.chi.gaussian_value(a as i64)?;
            let q = if a % 4 == 3 { self.two_lambda } else { 0 };
            let w = gauss_mul(cv, quarter_gauss(q));
            let k = ((a * mr + abar * nr) % c) as usize;
            coeffs[k].0 += w.0 * sym as i64;
            coeffs[k].1 += w.1 * sym as i64;
        }
        Some(CyclotomicSum { modulus: c, coeffs })
    }

    /// Coefficients `W_k` with `S(m, n; c) = Σ_k W_k e(km/c)` for every m,
    /// i.e. `W_a = w(a) e(ā n / c)` on units and zero elsewhere.
    pub fn m_spectrum(&self, n: i64) -> Vec<Complex64> {
        let c = self.c;
        let nr = n.rem_euclid(c as i64) as u64;
        let mut out = vec![Complex64::new(0.0, 0.0); c as usize];
        for ((&a, &abar), w) in self.units.iter().zip(&self.inverses).zip(&self.weights) {
            out[a as usize] = w * self.roots[((abar * nr) % c) as usize];
        }
        out
    }
}

/// Inverses of all `units` modulo `c` with a single extended-Euclid call.
fn batch_inverse(units: &[u64], c: u64) -> Vec<u64> {
    if units.is_empty() {
        return Vec::new();
    }
    if c == 1 {
        return vec![0; units.len()];
    }
    let small = c < 1 << 32;
    let mulmod = |a: u64, b: u64| {
        if small {
            a * b % c
        } else {
            ((a as u128 * b as u128) % c as u128) as u64
        }
    };
    let mut prefix = Vec::with_capacity(units.len());
    let mut acc = 1u64;
    for &a in units {
        acc = mulmod(acc, a);
        prefix.push(acc);
    }
    let mut inv = mod_inverse(acc as i64, c as i64).expect("product of units is a unit") as u64;
    let mut out = vec![0u64; units.len()];
    for i in (0..units.len()).rev() {
        let before = if i == 0 { 1 } else { prefix[i - 1] };
        out[i] = mulmod(inv, before);
        inv = mulmod(inv, units[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eps_values() {
        assert_eq!(eps(1).unwrap(), c(1.0, 0.0));
        assert_eq!(eps(3).unwrap(), c(0.0, 1.0));
        assert_eq!(eps(7).unwrap(), c(0.0, 1.0));
        assert_eq!(eps(-1).unwrap(), c(0.0, 1.0));
        assert!(eps(4).is_err());
    }

    #[test]
    fn eps_fourth_power_and_square() {
        for d in (1..10_000i64).step_by(2) {
            let e = eps(d).unwrap();
            assert!((e.powi(4) - 1.0).norm() < 1e-15);
            let minus_one_over_d = jacobi(-1, d).unwrap() as f64;
            assert!((e * e - minus_one_over_d).norm() < 1e-15, "d={d}");
        }
    }

    fn jacobi_brute(a: i64, n: i64) -> i8 {
        // product of Legendre symbols by Euler's criterion over the factorization
        factorize(n as u64)
            .into_iter()
            .map(|(p, e)| {
                let p = p as i64;
                let r = a.rem_euclid(p);
                let l = if r == 0 {
                    0
                } else if (1..p).any(|x| x * x % p == r) {
                    1
                } else {
                    -1
                };
                (l as i8).pow(e)
            })
            .product()
    }

    #[test]
    fn jacobi_examples_and_brute_force() {
        assert_eq!(jacobi_modified(4, 3).unwrap(), 1);
        assert_eq!(jacobi_modified(2, 5).unwrap(), -1);
        assert_eq!(jacobi_modified(0, 1).unwrap(), 1);
        assert_eq!(jacobi_modified(0, -1).unwrap(), 1);
        assert_eq!(jacobi_modified(0, 3).unwrap(), 0);
        assert!(jacobi_modified(3, 4).is_err());
        for n in (1..200i64).step_by(2) {
            for a in -60..60 {
                assert_eq!(jacobi(a, n).unwrap(), jacobi_brute(a, n), "({a}/{n})");
            }
        }
    }

    #[test]
    fn shimura_sign_rule() {
        assert_eq!(jacobi_modified(-4, -1).unwrap(), -1);
        assert_eq!(jacobi_modified(-4, 1).unwrap(), 1);
        assert_eq!(jacobi_modified(4, -1).unwrap(), 1);
        assert_eq!(jacobi_modified(-8, -5).unwrap(), -jacobi(-8, 5).unwrap());
    }

    #[test]
    fn kronecker_matches_jacobi_for_odd() {
        for n in (1..99i64).step_by(2) {
            for a in -30..30 {
                assert_eq!(kronecker(a, n), jacobi(a, n).unwrap());
            }
        }
        assert_eq!(kronecker(3, 2), -1);
        assert_eq!(kronecker(7, 2), 1);
        assert_eq!(kronecker(2, 4), 0);
    }

    #[test]
    fn inverses() {
        assert_eq!(mod_inverse(3, 4).unwrap(), 3);
        assert_eq!(mod_inverse(5, 12).unwrap(), 5);
        assert_eq!(mod_inverse(7, 40).unwrap(), 23);
        assert_eq!(mod_inverse(-1, 40).unwrap(), 39);
        assert!(matches!(mod_inverse(4, 12), Err(Error::NoInverse { .. })));
        let units: Vec<u64> = (1..360u64).filter(|&a| gcd(a as i64, 360) == 1).collect();
        let inv = batch_inverse(&units, 360);
        for (a, b) in units.iter().zip(inv) {
            assert_eq!(a * b % 360, 1);
        }
    }

    #[test]
    fn ramanujan_examples() {
        assert_eq!(ramanujan_sum(0, 12), 4);
        assert_eq!(ramanujan_sum(2, 4), -2);
        assert_eq!(ramanujan_sum(1, 6), 1);
        assert_eq!(ramanujan_sum(-2, 4), -2);
        assert_eq!(ramanujan_sum(5, 1), 1);
    }

    #[test]
    fn sigma_twisted_examples() {
        let s = c(0.3, 1.7);
        assert_eq!(sigma_twisted(s, 1, 4).unwrap(), c(0.0, 0.0));
        let v = sigma_twisted(s, 2, 4).unwrap();
        let expect = -((2.0 * s - 1.0) * 2f64.ln()).exp();
        assert!((v - expect).norm() < 1e-13);
        assert!(sigma_twisted(s, 0, 4).is_err());
        assert!(sigma_twisted(s, 2, 6).is_err());
    }

    #[test]
    fn sigma_twisted_removable_singularity() {
        // p^s = 1 at s = 0: both branches must agree with the limit.
        for &(n, four_n) in &[(2i64, 4u64), (12, 8), (6, 12), (18, 12), (36, 24)] {
            let at_zero = sigma_twisted(c(0.0, 0.0), n, four_n).unwrap();
            let near = sigma_twisted(c(1e-4, 0.0), n, four_n).unwrap();
            assert!((at_zero - near).norm() < 1e-2, "{n} {four_n}");
        }
    }

    #[test]
    fn sigma_multiplicative_across_coprime_blocks() {
        let s = c(-0.7, 0.4);
        for four_n in [4u64, 8, 12] {
            let gate = four_n / radical(four_n);
            for n1 in [1i64, 5, 7, 25, 35] {
                for n2 in [gate as i64, 2 * gate as i64, 3 * gate as i64] {
                    if gcd(n1, four_n as i64) != 1 || gcd(n1, n2) != 1 {
                        continue;
                    }
                    let whole = sigma_twisted(s, n1 * n2, four_n).unwrap();
                    let good = sigma_twisted(s, n1 * gate as i64, four_n).unwrap()
                        / sigma_twisted(s, gate as i64, four_n).unwrap();
                    let bad = sigma_twisted(s, n2, four_n).unwrap();
                    assert!((whole - good * bad).norm() < 1e-12 * whole.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn zero_mode_pole() {
        assert!(matches!(
            zero_mode_constant(c(1.0, 0.0), 4),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn character_validation() {
        assert!(DirichletCharacterMod4N::trivial(4).is_ok());
        assert!(DirichletCharacterMod4N::trivial(6).is_err());
        let chi = DirichletCharacterMod4N::kronecker(-4, 4).unwrap();
        assert_eq!(chi.value(3), c(-1.0, 0.0));
        let bad = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)];
        assert!(DirichletCharacterMod4N::new(4, bad).is_err());
        assert!(DirichletCharacterMod4N::kronecker(12, 576).is_ok());
    }

    #[test]
    fn salie_two_term_sum() {
        // c = 4, a in {1,3}; a=1: 1*1*e(2/4) = -1; a=3: (4/3)=1, eps_3^9 = i^9 = i,
        // abar = 3, e((3+3)/4) = e(1/2) = -1.
        let input = SalieSumInput {
            m: 1,
            n: 1,
            c: 4,
            chi: DirichletCharacterMod4N::trivial(4).unwrap(),
            weight: HalfIntegralWeight::new(9).unwrap(),
        };
        let v = salie_sum(&input).unwrap();
        assert!((v - c(-1.0, -1.0)).norm() < 1e-14, "{v}");
        let mut shifted = input.clone();
        shifted.m += 4;
        assert!((salie_sum(&shifted).unwrap() - v).norm() < 1e-13);
        let mut bad = input;
        bad.c = 6;
        assert!(salie_sum(&bad).is_err());
    }

    #[test]
    fn sieved_kernel_matches_definition() {
        let chis = [
            DirichletCharacterMod4N::trivial(4).unwrap(),
            DirichletCharacterMod4N::kronecker(12, 24).unwrap(),
            DirichletCharacterMod4N::kronecker(-4, 8).unwrap(),
        ];
        for chi in chis {
            let level = chi.modulus();
            for c in (level..=40 * level).step_by(level as usize) {
                for orientation in [SymbolOrientation::CoverA, SymbolOrientation::AoverC] {
                    for two_lambda in [1, 5, 9] {
                        let input = SalieSumInput {
                            m: 3,
                            n: 7,
                            c,
                            chi: chi.clone(),
                            weight: HalfIntegralWeight::new(two_lambda).unwrap(),
                        };
                        let fast = salie_sum_exact(&input, orientation).unwrap();
                        let slow = salie_sum_exact_direct(&input, orientation).unwrap();
                        assert_eq!(fast, slow, "c = {c}");
                        let order: Vec<u64> = (0..c).collect();
                        let direct = salie_sum_direct(&input, orientation, &order).unwrap();
                        let float = salie_sum_oriented(&input, orientation).unwrap();
                        assert!((direct - float).norm() < 1e-9 * (c as f64), "c = {c}");
                    }
                }
            }
        }
    }
}
