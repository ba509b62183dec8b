//! Exact residue polynomials `G_{δ,ν,λ}(H)`, their positive roots, and the
//! classification of admissible gamma factors `γ(s) = C H^s Γ_C(s + (ν−1)/2)`.
//!
//! `G` is the sum of residues of
//! `I(u) = H^{−u} Γ((λ−1+u)/2) Γ((ν−1−u)/2) / (Γ((λ+1−u)/2) Γ((ν+1+u)/2))`
//! at its right-hand poles `u = ν−1+2k`; for `H > 1` the integral of `I`
//! over any vertical line left of them equals `−G(H)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::HalfIntegralWeight;
use crate::error::{Error, Result};
use crate::special::gamma::ln_gamma;
use crate::special::{integrate_path, ContourPath, Decay, PrecisionConfig};

/// `Σ c_e H^{e/2}` with exact rational coefficients, keyed by twice the
/// exponent.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResiduePolynomial {
    pub terms: BTreeMap<i64, BigRational>,
}

impl ResiduePolynomial {
    pub fn is_zero(&self) -> bool {
        self.terms.values().all(Zero::is_zero)
    }

    pub fn eval(&self, h: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&e, c)| c.to_f64().unwrap_or(f64::NAN) * h.powf(e as f64 / 2.0))
            .sum()
    }

    pub fn scaled(&self, k: &BigRational) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&e, c)| (e, c * k))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    /// `(exponent numerator over 2, "p/q")` pairs, highest exponent first.
    pub fn coefficients(&self) -> Vec<(i64, String)> {
        self.terms
            .iter()
            .rev()
            .map(|(&e, c)| (e, c.to_string()))
            .collect()
    }
}

impl fmt::Display for ResiduePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&e, c) in self.terms.iter().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let exp = if e % 2 == 0 {
                format!("{}", e / 2)
            } else {
                format!("{e}/2")
            };
            if abs.is_one() {
                write!(f, "H^({exp})")?;
            } else {
                write!(f, "{abs} H^({exp})")?;
            }
        }
        Ok(())
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `Γ(x)/√π` for a half-odd `x = two_x/2`, exactly.
fn gamma_half_over_sqrt_pi(two_x: i64) -> BigRational {
    debug_assert!(two_x.rem_euclid(2) == 1);
    let mut value = rat(1);
    let mut t = 1i64;
    while t < two_x {
        // Γ(x + 1) = x Γ(x)
        value *= BigRational::new(BigInt::from(t), BigInt::from(2));
        t += 2;
    }
    while t > two_x {
        // Γ(x − 1) = Γ(x) / (x − 1)
        t -= 2;
        value /= BigRational::new(BigInt::from(t), BigInt::from(2));
    }
    value
}

/// `1/Γ(n)` for an integer `n`, zero at the poles.
fn rgamma_int(n: i64) -> BigRational {
    if n <= 0 {
        return BigRational::zero();
    }
    let mut fact = BigInt::one();
    for k in 2..n {
        fact *= k;
    }
    BigRational::new(BigInt::one(), fact)
}

fn check_parity(delta: u8, nu: HalfIntegralWeight, lambda: HalfIntegralWeight) -> Result<()> {
    if delta != 1 && delta != 3 {
        return Err(Error::Domain(format!("δ must be 1 or 3, got {delta}")));
    }
    let d = delta as u32;
    if nu.two_lambda() % 4 != d || lambda.two_lambda() % 4 != d {
        return Err(Error::Domain(format!(
            "need 2ν ≡ 2λ ≡ δ (mod 4); got 2ν = {}, 2λ = {}, δ = {delta}",
            nu.two_lambda(),
            lambda.two_lambda()
        )));
    }
    Ok(())
}

/// Exact `G_{δ,ν,λ}(H)`.
pub fn g_polynomial(
    delta: u8,
    nu: HalfIntegralWeight,
    lambda: HalfIntegralWeight,
) -> Result<ResiduePolynomial> {
    check_parity(delta, nu, lambda)?;
    let tn = nu.two_lambda() as i64;
    let tl = lambda.two_lambda() as i64;
    let mut terms = BTreeMap::new();
    let mut k = 0i64;
    loop {
        // u = ν − 1 + 2k, so 2u = 2ν − 2 + 4k.
        let two_u = tn - 2 + 4 * k;
        // (λ+1−u)/2 is an integer because λ − ν is even.
        let denom_int = (tl + 2 - two_u) / 4;
        if denom_int <= 0 {
            break;
        }
        // Γ((λ−1+u)/2) / Γ((ν+1+u)/2): both arguments are half-odd.
        let top = gamma_half_over_sqrt_pi((tl - 2 + two_u) / 2);
        let bottom = gamma_half_over_sqrt_pi((tn + 2 + two_u) / 2);
        // Res_{u=u_k} Γ((ν−1−u)/2) = −2 (−1)^k / k!
        let mut k_fact = BigInt::one();
        for j in 2..=k {
            k_fact *= j;
        }
        let sign = if k % 2 == 0 { -2 } else { 2 };
        let res = BigRational::new(BigInt::from(sign), k_fact);
        let coeff = res * top / bottom * rgamma_int(denom_int);
        if !coeff.is_zero() {
            terms.insert(-two_u, coeff);
        }
        k += 1;
    }
    Ok(ResiduePolynomial { terms })
}

/// Dense polynomial over the rationals, ascending coefficients.
type Poly = Vec<BigRational>;

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn eval_poly(p: &[BigRational], x: &BigRational) -> BigRational {
    p.iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn derivative(p: &[BigRational]) -> Poly {
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * rat(i as i64))
            .collect(),
    )
}

/// Quotient and remainder of `a / b`.
fn divmod(a: &[BigRational], b: &[BigRational]) -> (Poly, Poly) {
    let mut r: Poly = a.to_vec();
    let db = b.len() - 1;
    if r.len() < b.len() {
        return (Vec::new(), trim(r));
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    let lead = b[db].clone();
    for i in (0..q.len()).rev() {
        let coef = &r[i + db] / &lead;
        for (j, bj) in b.iter().enumerate() {
            r[i + j] = &r[i + j] - &coef * bj;
        }
        q[i] = coef;
    }
    (trim(q), trim(r))
}

fn poly_gcd(a: &[BigRational], b: &[BigRational]) -> Poly {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let (_, r) = divmod(&x, &y);
        x = y;
        y = r;
    }
    let lead = x.last().cloned().unwrap_or_else(BigRational::one);
    x.into_iter().map(|c| c / &lead).collect()
}

fn sign(x: &BigRational) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

fn sturm_chain(p: &[BigRational]) -> Vec<Poly> {
    let mut chain = vec![p.to_vec(), derivative(p)];
    loop {
        let n = chain.len();
        if chain[n - 1].is_empty() {
            chain.pop();
            return chain;
        }
        let (_, r) = divmod(&chain[n - 2], &chain[n - 1]);
        if r.is_empty() {
            return chain;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
}

fn sign_changes(chain: &[Poly], x: &BigRational) -> usize {
    let signs: Vec<i8> = chain
        .iter()
        .map(|p| sign(&eval_poly(p, x)))
        .filter(|&s| s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Integer polynomial in `t = H²` equivalent to `G(H) = 0` on `H > 0`,
/// ascending coefficients with content removed and positive leading term.
pub fn t_polynomial(p: &ResiduePolynomial) -> Result<Vec<BigInt>> {
    let terms: Vec<(&i64, &BigRational)> = p.terms.iter().filter(|(_, c)| !c.is_zero()).collect();
    if terms.is_empty() {
        return Err(Error::InvalidInput(
            "identically zero residue polynomial".into(),
        ));
    }
    let min = *terms[0].0;
    if terms.iter().any(|(&e, _)| (e - min) % 4 != 0) {
        return Err(Error::InvalidInput(
            "exponents are not congruent mod 2; no polynomial in H²".into(),
        ));
    }
    let deg = ((*terms[terms.len() - 1].0 - min) / 4) as usize;
    let mut coeffs = vec![BigRational::zero(); deg + 1];
    for (&e, c) in terms {
        coeffs[((e - min) / 4) as usize] = c.clone();
    }
    let lcm = coeffs
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut ints: Vec<BigInt> = coeffs
        .iter()
        .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    let flip = ints.last().is_some_and(|c| c.is_negative());
    for c in ints.iter_mut() {
        *c = &*c / &content;
        if flip {
            *c = -&*c;
        }
    }
    Ok(ints)
}

/// Positive real roots of an integer polynomial, isolated with a Sturm
/// sequence and refined by exact bisection to relative width `2^{-60}`.
pub fn positive_real_roots(coeffs: &[BigInt]) -> Result<Vec<f64>> {
    let mut p: Poly = trim(
        coeffs
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect(),
    );
    if p.is_empty() {
        return Err(Error::InvalidInput(
            "zero polynomial has no isolated roots".into(),
        ));
    }
    while p.len() > 1 && p[0].is_zero() {
        p.remove(0);
    }
    if p.len() == 1 {
        return Ok(Vec::new());
    }
    let g = poly_gcd(&p, &derivative(&p));
    let (sf, _) = divmod(&p, &g);
    let chain = sturm_chain(&sf);
    let lead = sf.last().expect("nonconstant").abs();
    let bound = sf
        .iter()
        .map(|c| c.abs() / &lead)
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a })
        + rat(1);
    let mut stack = vec![(BigRational::zero(), bound)];
    let mut roots = Vec::new();
    let two = rat(2);
    while let Some((a, b)) = stack.pop() {
        let count = sign_changes(&chain, &a) - sign_changes(&chain, &b);
        if count == 0 {
            continue;
        }
        if count > 1 {
            let mid = (&a + &b) / &two;
            stack.push((a, mid.clone()));
            stack.push((mid, b));
            continue;
        }
        let (mut lo, mut hi) = (a, b);
        let hi_sign = sign(&eval_poly(&sf, &hi));
        if hi_sign == 0 {
            roots.push(hi.to_f64().unwrap_or(f64::NAN));
            continue;
        }
        let tol = BigRational::new(BigInt::one(), BigInt::one() << 60u32);
        loop {
            let width = &hi - &lo;
            let scale = if hi > rat(1) { hi.clone() } else { rat(1) };
            if width <= &tol * scale {
                break;
            }
            let mid = (&lo + &hi) / &two;
            let s = sign(&eval_poly(&sf, &mid));
            if s == 0 {
                lo = mid.clone();
                hi = mid;
                break;
            }
            if s == hi_sign {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        roots.push(((&lo + &hi) / &two).to_f64().unwrap_or(f64::NAN));
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    Ok(roots)
}

/// Positive real `H` with `G(H) = 0`, ascending.
pub fn g_roots(p: &ResiduePolynomial) -> Result<Vec<f64>> {
    let t = t_polynomial(p)?;
    Ok(positive_real_roots(&t)?
        .into_iter()
        .map(f64::sqrt)
        .collect())
}

/// A `(δ, ν, λ)` triple, with half-integers given as twice their value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueRow {
    pub delta: u8,
    pub two_nu: u32,
    pub two_lambda: u32,
}

impl ResidueRow {
    pub fn polynomial(&self) -> Result<ResiduePolynomial> {
        g_polynomial(
            self.delta,
            HalfIntegralWeight::new(self.two_nu)?,
            HalfIntegralWeight::new(self.two_lambda)?,
        )
    }
}

/// The six rows used to rule out `H > 1`: two `λ` per `(δ, ν)` when the
/// first leaves a root other than 1, otherwise one.
pub const RESIDUE_ROWS: [ResidueRow; 6] = [
    ResidueRow {
        delta: 1,
        two_nu: 1,
        two_lambda: 9,
    },
    ResidueRow {
        delta: 1,
        two_nu: 1,
        two_lambda: 13,
    },
    ResidueRow {
        delta: 1,
        two_nu: 5,
        two_lambda: 9,
    },
    ResidueRow {
        delta: 3,
        two_nu: 3,
        two_lambda: 11,
    },
    ResidueRow {
        delta: 3,
        two_nu: 3,
        two_lambda: 15,
    },
    ResidueRow {
        delta: 3,
        two_nu: 7,
        two_lambda: 11,
    },
];

/// Clustering tolerance for comparing roots of different rows.
pub const ROOT_CLUSTER_TOL: f64 = 1e-9;

/// Roots shared by every row.
pub fn common_root_filter(rows: &[ResidueRow]) -> Result<Vec<f64>> {
    let Some(first) = rows.first() else {
        return Err(Error::InvalidInput("no rows given".into()));
    };
    if rows
        .iter()
        .any(|r| r.delta != first.delta || r.two_nu != first.two_nu)
    {
        return Err(Error::InvalidInput("rows must share (δ, ν)".into()));
    }
    let mut common = g_roots(&first.polynomial()?)?;
    for row in &rows[1..] {
        let roots = g_roots(&row.polynomial()?)?;
        common.retain(|x| {
            roots
                .iter()
                .any(|y| (x - y).abs() <= ROOT_CLUSTER_TOL * x.max(1.0))
        });
    }
    Ok(common)
}

/// One row of the classification of `γ̃(s) = γ(s + (ν̄+1)/2)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub nu_bar: HalfIntegralWeight,
    pub delta: u8,
    /// γ̃ has poles at every integer `s <= forced_pole_max`.
    pub forced_pole_max: i64,
    /// Integers where γ̃ may or may not have a pole.
    pub possible_poles: Vec<i64>,
    /// Each candidate `P(s)` as its list of roots.
    pub candidate_p: Vec<Vec<i64>>,
    pub candidate_nu: Vec<HalfIntegralWeight>,
}

impl ClassificationRow {
    /// `P(s)` written as a product, e.g. `s(s+1)`.
    pub fn describe_p(roots: &[i64]) -> String {
        roots
            .iter()
            .map(|&r| match r {
                0 => "s".to_string(),
                r if r < 0 => format!("(s+{})", -r),
                r => format!("(s-{r})"),
            })
            .collect()
    }
}

/// Classification for `ν̄ ∈ {1/2, 3/2, 5/2, 7/2}`, derived from the pole
/// structure: the forced poles of γ̃ are the integers `n < −(3+2ν̄)/4`;
/// γ̃ has no poles in `Re s >= −ν̄/2`, so `P` vanishes at the integers in
/// `[−ν̄/2, 0]` and optionally at the remaining unforced integers; `P`
/// must be `s(s+1)…(s+k−1)`, which gives `ν = 2k − ν̄`.
pub fn table1_classify(nu_bar: HalfIntegralWeight) -> Result<ClassificationRow> {
    let t = nu_bar.two_lambda() as i64;
    if t > 7 {
        return Err(Error::InvalidInput(format!(
            "ν̄ must be one of 1/2, 3/2, 5/2, 7/2, got {}/2",
            t
        )));
    }
    let delta = (-t).rem_euclid(4) as u8;
    // n < −(3 + t)/4
    let forced_pole_max = (-4 - t).div_euclid(4);
    let mut mandatory = Vec::new();
    let mut possible_poles = Vec::new();
    for n in (forced_pole_max + 1..=0).rev() {
        // n >= −t/4  ⇔  4n >= −t
        if 4 * n >= -t {
            mandatory.push(n);
        } else {
            possible_poles.push(n);
        }
    }
    let mut candidate_p = Vec::new();
    let mut candidate_nu = Vec::new();
    for mask in 0..(1u32 << possible_poles.len()) {
        let mut roots = mandatory.clone();
        for (i, &p) in possible_poles.iter().enumerate() {
            if mask & (1 << i) != 0 {
                roots.push(p);
            }
        }
        roots.sort_unstable_by(|a, b| b.cmp(a));
        let consecutive = roots.iter().enumerate().all(|(i, &r)| r == -(i as i64));
        if !consecutive {
            continue;
        }
        let k = roots.len() as i64;
        let two_nu = 4 * k - t;
        if (1..=7).contains(&two_nu) {
            candidate_p.push(roots);
            candidate_nu.push(HalfIntegralWeight::new(two_nu as u32)?);
        }
    }
    Ok(ClassificationRow {
        nu_bar,
        delta,
        forced_pole_max,
        possible_poles,
        candidate_p,
        candidate_nu,
    })
}

/// `G(H)` from the exact residues and from quadrature of `−(1/2πi)∫ I(u) du`
/// along a line left of the poles, bent to the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GCrossCheck {
    pub exact: f64,
    pub quadrature: f64,
    pub quadrature_error: f64,
}

pub fn g_numeric_crosscheck(
    delta: u8,
    nu: HalfIntegralWeight,
    lambda: HalfIntegralWeight,
    h: f64,
    cfg: &PrecisionConfig,
) -> Result<GCrossCheck> {
    if !(h > 1.0) {
        return Err(Error::Domain(format!(
            "the contour comparison needs H > 1, got {h}"
        )));
    }
    let poly = g_polynomial(delta, nu, lambda)?;
    let (n, l) = (nu.value(), lambda.value());
    let ln_h = h.ln();
    let integrand = |u: Complex64| {
        let ln = -u * ln_h + ln_gamma((u + (l - 1.0)) / 2.0) + ln_gamma((-u + (n - 1.0)) / 2.0)
            - ln_gamma((-u + (l + 1.0)) / 2.0)
            - ln_gamma((u + (n + 1.0)) / 2.0);
        ln.exp()
    };
    let sigma = ((1.0 - l) + (n - 1.0)) / 2.0;
    let poles: Vec<Complex64> = (0..)
        .map(|k| Complex64::new(n - 1.0 + 2.0 * k as f64, 0.0))
        .take_while(|p| p.re <= l)
        .collect();
    let path = ContourPath::bent(sigma, 0.5, 2.0);
    let res = integrate_path(integrand, &path, Decay::Rapid, &poles, cfg)?;
    Ok(GCrossCheck {
        exact: poly.eval(h),
        quadrature: -res.value.re,
        quadrature_error: res.error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(t: u32) -> HalfIntegralWeight {
        HalfIntegralWeight::new(t).unwrap()
    }

    #[test]
    fn half_integer_gamma() {
        // Γ(5/2)/√π = 3/4, Γ(−1/2)/√π = −2
        assert_eq!(
            gamma_half_over_sqrt_pi(5),
            BigRational::new(3.into(), 4.into())
        );
        assert_eq!(gamma_half_over_sqrt_pi(-1), rat(-2));
        assert_eq!(gamma_half_over_sqrt_pi(1), rat(1));
    }

    #[test]
    fn first_row_polynomial() {
        let p = g_polynomial(1, w(1), w(9)).unwrap();
        assert_eq!(p.to_string(), "-1/2 H^(1/2) + 3 H^(-3/2) - 5/2 H^(-7/2)");
        let t = t_polynomial(&p).unwrap();
        assert_eq!(t, vec![BigInt::from(5), BigInt::from(-6), BigInt::from(1)]);
    }

    #[test]
    fn parity_mismatch() {
        assert!(matches!(g_polynomial(1, w(3), w(9)), Err(Error::Domain(_))));
        assert!(matches!(
            g_polynomial(1, w(1), w(11)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sturm_handles_repeated_roots() {
        // (t − 1)² (t − 4)(t + 3)
        let c: Vec<BigInt> = [-12i64, 23, -9, -3, 1]
            .iter()
            .map(|&x| BigInt::from(x))
            .collect();
        let roots = positive_real_roots(&c).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - 1.0).abs() < 1e-15 && (roots[1] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert!(g_roots(&ResiduePolynomial::default()).is_err());
    }

    #[test]
    fn classification_rows() {
        let r = table1_classify(w(1)).unwrap();
        assert_eq!(r.delta, 3);
        assert_eq!(r.forced_pole_max, -2);
        assert_eq!(r.possible_poles, vec![-1]);
        assert_eq!(r.candidate_p, vec![vec![0], vec![0, -1]]);
        assert_eq!(r.candidate_nu, vec![w(3), w(7)]);
        let r = table1_classify(w(7)).unwrap();
        assert_eq!(r.delta, 1);
        assert_eq!(r.forced_pole_max, -3);
        assert_eq!(r.candidate_p, vec![vec![0, -1], vec![0, -1, -2]]);
        assert_eq!(r.candidate_nu, vec![w(1), w(5)]);
        assert_eq!(ClassificationRow::describe_p(&[0, -1, -2]), "s(s+1)(s+2)");
        assert!(table1_classify(w(9)).is_err());
    }
}
