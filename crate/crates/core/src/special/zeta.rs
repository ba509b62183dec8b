//! Riemann ζ(s) on the whole plane minus s = 1, by Euler–Maclaurin
//! summation, and ζ with finitely many Euler factors removed.

use num_complex::Complex64;

use super::gamma::ln_gamma;
use crate::arith::prime_divisors;
use crate::error::{Error, Result};

/// B_{2k} / (2k)! for k = 1..=12.
const BERNOULLI_OVER_FACTORIAL: [f64; 12] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
    43867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
    77683.0 / 14_101_100_039_391_805_440_000.0,
    -236_364_091.0 / 1_693_824_136_731_743_669_452_800_000.0,
];

fn npow(n: f64, s: Complex64) -> Complex64 {
    (-s * n.ln()).exp()
}

pub fn zeta(s: Complex64) -> Result<Complex64> {
    if (s - 1.0).norm() < 1e-14 {
        return Err(Error::pole(1.0, 0.0));
    }
    if s.re < 0.0 {
        // ζ(s) = 2^s π^{s−1} sin(πs/2) Γ(1−s) ζ(1−s)
        let reflected = zeta(1.0 - s)?;
        let pre = (s * std::f64::consts::LN_2
            + (s - 1.0) * std::f64::consts::PI.ln()
            + ln_gamma(1.0 - s))
        .exp();
        return Ok(pre * (s * std::f64::consts::FRAC_PI_2).sin() * reflected);
    }
    let n_terms = (s.norm().ceil() as usize + 10).max(20);
    let n = n_terms as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..n_terms {
        acc += npow(k as f64, s);
    }
    let nps = npow(n, s);
    acc += nps * n / (s - 1.0) + nps * 0.5;
    // s (s+1) ... (s+2k-2) N^{-s-2k+1}
    let mut rising = s;
    let mut power = nps / n;
    for (k, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = rising * power * *c;
        acc += term;
        if term.norm() < 1e-18 * acc.norm() {
            break;
        }
        let kk = 2.0 * k as f64;
        rising *= (s + kk + 1.0) * (s + kk + 2.0);
        power /= n * n;
    }
    Ok(acc)
}

/// `ζ(s) ∏_{p | m} (1 − p^{−s})`.
pub fn zeta_without(s: Complex64, m: u64) -> Result<Complex64> {
    let mut z = zeta(s)?;
    for p in prime_divisors(m) {
        z *= 1.0 - npow(p as f64, s);
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classical_values() {
        let checks = [
            (2.0, PI * PI / 6.0),
            (4.0, PI.powi(4) / 90.0),
            (3.0, 1.202_056_903_159_594_3),
            (0.0, -0.5),
            (-1.0, -1.0 / 12.0),
            (0.5, -1.460_354_508_809_586_8),
            (-3.0, 1.0 / 120.0),
        ];
        for (s, v) in checks {
            let z = zeta(c(s, 0.0)).unwrap();
            assert!(
                (z - c(v, 0.0)).norm() < 1e-13 * v.abs().max(1.0),
                "zeta({s}) = {z}"
            );
        }
        assert!(zeta(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn first_zero() {
        let z = zeta(c(0.5, 14.134_725_141_734_693)).unwrap();
        assert!(z.norm() < 1e-12, "{z}");
    }

    #[test]
    fn removed_factors() {
        // ζ^{(4)}(2) = (1 − 1/4) π²/6
        let z = zeta_without(c(2.0, 0.0), 4).unwrap();
        assert!((z.re - 0.75 * PI * PI / 6.0).abs() < 1e-14);
        let direct: f64 = (1..2_000_000u64)
            .rev()
            .filter(|n| n % 2 == 1 && n % 3 != 0)
            .map(|n| (n as f64).powi(-4))
            .sum();
        let z = zeta_without(c(4.0, 0.0), 12).unwrap();
        assert!((z.re - direct).abs() < 1e-14);
    }
}
