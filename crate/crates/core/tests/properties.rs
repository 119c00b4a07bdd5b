use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use gflab::arith::{int, rat};
use gflab::ball::Ball;
use gflab::gfun::{divisor_count, find_functional_relations, find_ode, weil_height, weil_height_rational};
use gflab::isogeny::{build_p_fin, build_p_inf, outside_diagonal_ideal, ArchData};
use gflab::padic::PadicNum;
use gflab::place::{eval_padic, eval_real, f_coefficient_bound};
use gflab::poly::Poly;
use gflab::qexp::{self, Name};
use gflab::quad::QuadNum;
use gflab::series::QSeries;

fn int_series(offset: i64, len: usize) -> impl Strategy<Value = QSeries> {
    prop::collection::vec(-50i64..50, len).prop_map(move |c| QSeries::from_i64(offset, &c))
}

fn nonzero_rational() -> impl Strategy<Value = BigRational> {
    (-10_000i64..10_000, 1i64..10_000).prop_filter_map("nonzero", |(n, d)| (n != 0).then(|| rat(n, d)))
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn composition_keeps_integrality(f in int_series(0, 12), g in int_series(1, 11)) {
        let h = f.compose(&g).unwrap();
        prop_assert!(h.is_integral());
    }

    #[test]
    fn compositional_inverse_round_trip(tail in prop::collection::vec(-20i64..20, 10), sign in prop::bool::ANY) {
        let mut c = vec![if sign { 1 } else { -1 }];
        c.extend(tail);
        let f = QSeries::from_i64(1, &c);
        let g = f.comp_inverse().unwrap();
        let x = QSeries::x(f.order());
        prop_assert_eq!(g.compose(&f).unwrap(), x.clone());
        prop_assert_eq!(f.compose(&g).unwrap(), x);
    }

    #[test]
    fn sqrt_one_squares_back(tail in prop::collection::vec(-30i64..30, 15)) {
        let mut c = vec![1];
        c.extend(tail);
        let f = QSeries::from_i64(0, &c);
        let r = f.sqrt_one().unwrap();
        prop_assert_eq!(&r * &r, f);
    }

    #[test]
    fn multiplication_commutes_and_associates(a in int_series(0, 10), b in int_series(-1, 11), c in int_series(2, 8)) {
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn ball_operations_contain_exact_results(x in nonzero_rational(), y in nonzero_rational(), prec in 64u64..300) {
        let (bx, by) = (Ball::from_rational(&x, prec), Ball::from_rational(&y, prec));
        prop_assert!(bx.add(&by).contains_rational(&(&x + &y)));
        prop_assert!(bx.sub(&by).contains_rational(&(&x - &y)));
        prop_assert!(bx.mul(&by).contains_rational(&(&x * &y)));
        prop_assert!(bx.div(&by).unwrap().contains_rational(&(&x / &y)));
        prop_assert!(bx.sqr().contains_rational(&(&x * &x)));
    }

    #[test]
    fn padic_digits_are_stable_under_more_precision(n in 1i64..1000, d in 1i64..1000, p in prop::sample::select(vec![2u64, 3, 5, 7])) {
        prop_assume!(d % p as i64 != 0);
        let x = rat(n * p as i64, d);
        let f = qexp::get(Name::F, 120).unwrap();
        let lo = eval_padic(&f, &PadicNum::from_rational(&x, p, 30), 20, None).unwrap();
        let hi = eval_padic(&f, &PadicNum::from_rational(&x, p, 60), 40, None).unwrap();
        prop_assert_eq!(lo.congruent(&hi, 20), Some(true));
    }

    #[test]
    fn archimedean_enclosures_nest_when_bits_double(d in 2000i64..100_000) {
        let f = qexp::get(Name::F, 300).unwrap();
        let bound = f_coefficient_bound(&rat(1, 1800));
        let x = rat(1, d);
        let lo = eval_real(&f, &Ball::from_rational(&x, 96), Some(&bound)).unwrap().0;
        let hi = eval_real(&f, &Ball::from_rational(&x, 192), Some(&bound)).unwrap().0;
        prop_assert!(lo.overlaps(&hi));
        prop_assert!(hi.rad() <= lo.rad());
    }

    #[test]
    fn p_fin_degree_is_twice_the_divisor_count(m in 1u64..40, n in 1i64..50, d in 1i64..50) {
        let p = build_p_fin(&QuadNum::rational(rat(n, d)), m);
        prop_assert_eq!(p.total_degree(), Some(2 * divisor_count(m) as u32));
        prop_assert!(p.is_homogeneous());
    }

    #[test]
    fn quadratic_p_inf_leaves_the_diagonal_ideal(
        a in 1i64..20, b in -20i64..20, d in 1i64..20, r in prop::sample::select(vec![-2i64, -1, 1, 2]),
        a2 in 1i64..20, b2 in -20i64..20, d2 in 1i64..20, r2 in prop::sample::select(vec![-2i64, -1, 1, 2]),
    ) {
        let p = build_p_inf(&ArchData::synthetic(a, b, d, r), Some(&ArchData::synthetic(a2, b2, d2, r2))).unwrap();
        prop_assert!(!p.is_zero());
        prop_assert!(p.total_degree().unwrap() <= 2);
        prop_assert!(outside_diagonal_ideal(&p));
    }

    #[test]
    fn height_power_rule(n in 1i64..500, d in 1i64..500, e in 1u32..5) {
        let x = rat(n, d);
        let (num, den) = (x.numer().pow(e), x.denom().pow(e));
        let h = weil_height(&[-num, den]).unwrap();
        let base = weil_height_rational(&x);
        prop_assert!(h.value.overlaps(&base.value.mul_i64(e as i64)));
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn guessed_operators_annihilate_held_out_terms(c in 1i64..30, k in 1i64..4) {
        // (1 − cX)^{-k}
        let base = QSeries::from_i64(0, &[1, -c]).extend_to(140).reciprocal().unwrap();
        let f = (1..k).fold(base.clone(), |acc, _| &acc * &base);
        let fit = find_ode(&f, 1, 1).unwrap().unwrap();
        prop_assert!(fit.held_out >= 50);
        prop_assert!(fit.ode.apply(&f).is_zero());
    }

    #[test]
    fn planted_relations_are_recovered(c0 in -5i64..6, c1 in -5i64..6, c2 in 1i64..6) {
        let f = qexp::get(Name::F, 80).unwrap();
        let c = Poly::from_i64(&[c0, c1, c2]);
        let g = &QSeries::new(0, (0..=80).map(|k| c.coeff(k)).collect()) * &f;
        let r = find_functional_relations(&[f.clone(), g.clone()], 1, 2).unwrap();
        prop_assert_eq!(r.relations.len(), 1);
        let rel = &r.relations[0];
        prop_assert!(rel.confirmed);
        let lift = |p: &Poly| QSeries::new(0, (0..=80).map(|k| p.coeff(k)).collect());
        let v = rel.poly.eval_with(&[f, g], lift, |a, b| a + b, |a, b| a * b).unwrap();
        prop_assert!(v.is_zero());
    }
}

#[test]
fn heights_of_integers_and_unit_fractions() {
    for n in 1..20i64 {
        let h = weil_height_rational(&rat(1, n));
        let l = Ball::from_i64(n, 128).log().unwrap();
        assert!(h.value.overlaps(&l));
        assert!(weil_height(&[BigInt::from(-n), BigInt::from(1)]).unwrap().value.overlaps(&l));
    }
    assert!(weil_height_rational(&int(0)).value.contains_zero());
}
