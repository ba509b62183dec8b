use halfint::arith::{
    jacobi, mod_inverse, ramanujan_sum, ramanujan_sum_direct, salie_sum_exact,
    salie_sum_exact_direct, DirichletCharacterMod4N, HalfIntegralWeight, SalieSumInput,
    SymbolOrientation,
};
use halfint::forms::{ingest_coefficients, write_coefficients, QExpansion};
use halfint::gammasolve::g_polynomial;
use halfint::special::mellin::chebyshev_v;
use halfint::special::{bessel_j, PrecisionConfig};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ramanujan_sum_is_the_unit_exponential_sum(n in -300i64..300, q in 1u64..300) {
        prop_assert_eq!(ramanujan_sum(n, q), ramanujan_sum_direct(n, q));
    }

    #[test]
    fn inverse_is_an_inverse(a in -10_000i64..10_000, c in 2i64..5_000) {
        prop_assume!(num_integer::Integer::gcd(&a, &c) == 1);
        let inv = mod_inverse(a, c).unwrap();
        prop_assert!((0..c).contains(&inv));
        prop_assert_eq!((a.rem_euclid(c) * inv) % c, 1);
    }

    #[test]
    fn jacobi_is_multiplicative_on_top(a in -500i64..500, b in -500i64..500, n in 0i64..400) {
        let n = 2 * n + 1;
        let ab = jacobi(a * b, n).unwrap();
        prop_assert_eq!(ab, jacobi(a, n).unwrap() * jacobi(b, n).unwrap());
    }

    #[test]
    fn fast_salie_sum_is_exact(
        k in 1u64..40,
        m in -50i64..50,
        n in -50i64..50,
        two_lambda in prop::sample::select(vec![1u32, 3, 5, 9]),
        cover_a in any::<bool>(),
    ) {
        let orientation = if cover_a { SymbolOrientation::CoverA } else { SymbolOrientation::AoverC };
        let input = SalieSumInput {
            m,
            n,
            c: 4 * k,
            chi: DirichletCharacterMod4N::trivial(4).unwrap(),
            weight: HalfIntegralWeight::new(two_lambda).unwrap(),
        };
        prop_assert_eq!(
            salie_sum_exact(&input, orientation).unwrap(),
            salie_sum_exact_direct(&input, orientation).unwrap()
        );
    }

    #[test]
    fn bessel_three_term_recurrence(two_nu in 3u32..30, x in 0.05f64..60.0) {
        let cfg = PrecisionConfig::default();
        let nu = two_nu as f64 / 2.0;
        let lower = bessel_j(nu - 1.0, x, &cfg).unwrap();
        let mid = bessel_j(nu, x, &cfg).unwrap();
        let upper = bessel_j(nu + 1.0, x, &cfg).unwrap();
        let scale = lower.abs() + upper.abs() + (2.0 * nu / x * mid).abs();
        prop_assert!((lower + upper - 2.0 * nu / x * mid).abs() <= 1e-9 * scale.max(1e-300));
    }

    #[test]
    fn chebyshev_v_trigonometric_form(n in 0usize..20, theta in 0.01f64..3.1) {
        let v = chebyshev_v(n, theta.cos());
        let trig = ((n as f64 + 0.5) * theta).cos() / (theta / 2.0).cos();
        prop_assert!((v - trig).abs() <= 1e-10 * (1.0 + trig.abs()));
    }

    #[test]
    fn every_residue_polynomial_vanishes_at_one(
        three in any::<bool>(),
        low_nu in any::<bool>(),
        k in 2u32..6,
    ) {
        let delta: u8 = if three { 3 } else { 1 };
        let two_nu = match (three, low_nu) {
            (false, true) => 1,
            (false, false) => 5,
            (true, true) => 3,
            (true, false) => 7,
        };
        let two_lambda = 4 * k + delta as u32;
        prop_assume!(two_lambda >= 9 && two_lambda > two_nu);
        let g = g_polynomial(
            delta,
            HalfIntegralWeight::new(two_nu).unwrap(),
            HalfIntegralWeight::new(two_lambda).unwrap(),
        )
        .unwrap();
        prop_assert!(g.eval(1.0).abs() < 1e-12);
    }

    #[test]
    fn coefficient_files_round_trip(
        coeffs in prop::collection::vec((1u64..500, -1e3f64..1e3, -1e3f64..1e3), 1..40),
    ) {
        let mut terms: Vec<(u64, Complex64)> = coeffs
            .into_iter()
            .map(|(n, re, im)| (n, Complex64::new(re, im)))
            .collect();
        terms.sort_by_key(|t| t.0);
        terms.dedup_by_key(|t| t.0);
        let form = QExpansion::from_terms(
            4,
            HalfIntegralWeight::new(13).unwrap(),
            DirichletCharacterMod4N::trivial(4).unwrap(),
            500,
            terms,
            Complex64::new(0.0, 0.0),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_coefficients(&form, &["round trip"], &mut buf).unwrap();
        let back = ingest_coefficients(buf.as_slice()).unwrap();
        prop_assert!(back.warnings.is_empty());
        prop_assert_eq!(back.form.support(), form.support());
        prop_assert_eq!(back.form.cutoff(), form.cutoff());
    }
}
