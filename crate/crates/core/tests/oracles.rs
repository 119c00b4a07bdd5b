//! Frozen values checked against independent brute-force computations.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};

use gflab::arith::{int, rat, val_rat};
use gflab::ball::{Ball, ComplexBall};
use gflab::gfun::{hensel_series, BiPoly};
use gflab::gfun::{check_divisor_bound, divisor_count};
use gflab::isogeny::{self, build_p_inf, ArchData};
use gflab::padic::PadicNum;
use gflab::period;
use gflab::place::{eval_complex, eval_padic, f_coefficient_bound};
use gflab::poly::Poly;
use gflab::qexp::{self, Eisenstein, Name};
use gflab::quad::QuadNum;
use gflab::series::QSeries;

fn coeffs(f: &QSeries, from: i64, to: i64) -> Vec<BigRational> {
    (from..=to).map(|k| f.coeff(k)).collect()
}

fn ints(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| int(x)).collect()
}

/// `σ_k(n)` by scanning every candidate divisor.
fn sigma(n: i64, k: u32) -> BigInt {
    (1..=n).filter(|d| n % d == 0).map(|d| BigInt::from(d).pow(k)).sum()
}

/// `1/f` for `f(0) = 1` by solving the triangular convolution system.
fn reciprocal_by_convolution(f: &[BigRational], n: usize) -> Vec<BigRational> {
    let mut g = vec![BigRational::zero(); n];
    g[0] = BigRational::one();
    for k in 1..n {
        let s: BigRational = (1..=k).filter(|&i| i < f.len()).map(|i| &f[i] * &g[k - i]).sum();
        g[k] = -s;
    }
    g
}

#[test]
fn catalan_inverse() {
    let f = QSeries::from_i64(1, &[1, -1]).extend_to(12);
    let g = f.comp_inverse().unwrap();
    for n in 1..=12i64 {
        let catalan = binomial(BigInt::from(2 * (n - 1)), BigInt::from(n - 1)) / BigInt::from(n);
        assert_eq!(g.coeff(n), BigRational::from_integer(catalan));
    }
}

#[test]
fn reciprocals() {
    let e4 = qexp::eisenstein(Eisenstein::E4, 8);
    let want = reciprocal_by_convolution(&coeffs(&e4, 0, 8), 9);
    assert_eq!(coeffs(&e4.reciprocal().unwrap(), 0, 8), want);
    assert_eq!(want[..3], ints(&[1, -240, 55440])[..]);

    // 1/j: j = q^{-1}·J with J(0) = 1, so 1/j = q·(1/J)
    let j = qexp::get(Name::J, 10).unwrap();
    let jj = coeffs(&j, -1, 10);
    let inv = reciprocal_by_convolution(&jj, 11);
    let got = qexp::get(Name::InvJ, 10).unwrap();
    assert_eq!(coeffs(&got, 1, 10), inv[..10]);
    assert_eq!(inv[..3], ints(&[1, -744, 356652])[..]);
}

#[test]
fn binomial_square_root() {
    // (1+4X)^{1/2} = Σ C(1/2, n) 4^n X^n
    let r = QSeries::from_i64(0, &[1, 4]).extend_to(10).sqrt_one().unwrap();
    let mut c = BigRational::one();
    for n in 0..=10i64 {
        assert_eq!(r.coeff(n), c.clone() * BigRational::from_integer(BigInt::from(4).pow(n as u32)));
        c = c * (rat(1, 2) - int(n)) / int(n + 1);
    }
    assert_eq!(coeffs(&r, 0, 5), ints(&[1, 2, -2, 4, -10, 28]));
}

#[test]
fn alpha_from_e6_over_e4() {
    let e4 = qexp::eisenstein(Eisenstein::E4, 12);
    let e6 = qexp::eisenstein(Eisenstein::E6, 12);
    let ratio = &e6 * &e4.reciprocal().unwrap();
    // h = (E6/E4 − 1)/4, then α = √(1 + 4h) with value 1
    let h = (&ratio - &QSeries::one(12)).scale(&rat(1, 4));
    assert_eq!(coeffs(&h, 1, 2), ints(&[-186, 39942]));
    let a = (&QSeries::one(12) + &h.scale_int(4)).sqrt_one().unwrap();
    assert_eq!(a, qexp::get(Name::Alpha, 12).unwrap());
    assert_eq!(coeffs(&a, 0, 2), ints(&[1, -372, 10692]));
    let f = a.compose(&qexp::get(Name::Theta, 12).unwrap()).unwrap();
    assert_eq!(coeffs(&f, 0, 2), ints(&[1, -372, -266076]));
}

#[test]
fn divisor_sums_and_eisenstein() {
    for (k, order) in [(3u32, 12i64), (5, 12)] {
        let s = qexp::sigma_series(k, order).unwrap();
        for n in 1..=order {
            assert_eq!(s.coeff(n), BigRational::from_integer(sigma(n, k)));
        }
    }
    let e4 = qexp::eisenstein(Eisenstein::E4, 6);
    let e6 = qexp::eisenstein(Eisenstein::E6, 6);
    for n in 1..=6 {
        assert_eq!(e4.coeff(n), BigRational::from_integer(sigma(n, 3) * 240));
        assert_eq!(e6.coeff(n), BigRational::from_integer(sigma(n, 5) * -504));
    }
    let (_, a6) = qexp::tate_coefficients(3).unwrap();
    assert_eq!(a6.coeff(1), -(int(5) * int(1) + int(7) * int(1)) / int(12));
}

#[test]
fn chain_rule_through_theta() {
    let t = qexp::get(Name::Theta, 40).unwrap();
    let ij = qexp::get(Name::InvJ, 40).unwrap();
    let d = ij.compose(&t).unwrap().derivative();
    assert_eq!(d, QSeries::one(d.order()));
}

#[test]
fn evaluations_at_named_points() {
    let f = qexp::get(Name::F, 200).unwrap();
    let at0 = eval_padic(&f, &PadicNum::zero(5, 30), 30, None).unwrap();
    assert_eq!(at0.congruent(&PadicNum::from_i64(1, 5, 30), 30), Some(true));

    let s = rat(1, 1_000_000);
    let x = ComplexBall::from_real(&Ball::from_rational(&s, 128));
    let v = eval_complex(&f, &x, Some(&f_coefficient_bound(&rat(1, 1800)))).unwrap();
    assert!(v.certified);
    assert!((v.value.re().to_f64() - (1.0 - 372e-6 - 266076e-12)).abs() < 1e-9);
    // partial sum by hand; the tail past X^40 is far below the 128-bit radius
    let partial: BigRational = (0..=40).map(|n| f.coeff(n) * s.pow(n as i32)).sum();
    let tol = Ball::from_rational(&rat(1, 10), 128).pow(35);
    assert!(v.value.re().sub(&Ball::from_rational(&partial, 256)).abs_upper() < tol.upper());

    let q = period::q_from_s(&s, 128).unwrap();
    let theta = qexp::get(Name::Theta, 40).unwrap();
    let tp: BigRational = (1..=40).map(|n| theta.coeff(n) * s.pow(n as i32)).sum();
    assert!(q.re().sub(&Ball::from_rational(&tp, 256)).abs_upper() < tol.upper());
    assert!((q.re().to_f64() - (1e-6 + 744e-12)).abs() < 1e-12);
}

#[test]
fn hensel_branches() {
    let sq = BiPoly::new(vec![Poly::from_i64(&[-1, -4]), Poly::zero(), Poly::from_i64(&[1])]);
    let y = hensel_series(&sq, &int(1), 12).unwrap().series;
    assert_eq!(y, QSeries::from_i64(0, &[1, 4]).extend_to(12).sqrt_one().unwrap());
    let cat = BiPoly::new(vec![Poly::from_i64(&[0, -1]), Poly::from_i64(&[1]), Poly::from_i64(&[1])]);
    let y = hensel_series(&cat, &int(0), 10).unwrap().series;
    for n in 1..=10i64 {
        let c = binomial(BigInt::from(2 * (n - 1)), BigInt::from(n - 1)) / BigInt::from(n);
        let sign = if n % 2 == 1 { 1 } else { -1 };
        assert_eq!(y.coeff(n), BigRational::from_integer(c * sign));
    }
}

#[test]
fn divisor_scan_matches_brute_force() {
    let r = check_divisor_bound(0.5, 5000);
    let brute = (1..=5000u64)
        .map(|n| (n, (1..=n).filter(|d| n % d == 0).count() as f64 / (n as f64).sqrt()))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    assert_eq!(r.argmax, brute.0);
    assert!((r.max_ratio - brute.1).abs() < 1e-12);
    assert_eq!(divisor_count(12), 6);
}

#[test]
fn level_two_modular_polynomial() {
    let phi = isogeny::phi2();
    assert_eq!(phi.coeff(2, 2), BigInt::from(-1));
    assert_eq!(phi.coeff(1, 1), BigInt::from(40773375));
    assert_eq!(phi.coeff(3, 0), BigInt::one());
    assert_eq!(phi.coeff(0, 0), BigInt::from(-157464000000000i64));
    // independent substitution to a higher order than generation used
    let j1 = qexp::get(Name::J, 200).unwrap();
    let j2 = j1.subs_power(2).truncate(200);
    assert!(phi.eval_series(&j1, &j2).truncate(199).is_zero());
}

#[test]
fn x0_pair_at_five() {
    let (j1, j2) = isogeny::x0_j_invariants(&int(5)).unwrap();
    assert_eq!((j1.clone(), j2.clone()), (rat(17779581, 25), rat(9261, 5)));
    assert!(isogeny::phi2().eval(&j1, &j2).is_zero());
    let pair = isogeny::x0_pair(&int(5), 5).unwrap();
    assert_eq!(val_rat(&pair.s1, 5), Some(2));
    assert_eq!(val_rat(&pair.s2, 5), Some(1));
    let r = period::delta_s_radius();
    assert!(&pair.s1 < r && &pair.s2 < r);
}

#[test]
fn regression_scalars_at_five() {
    let pair = isogeny::extract_isogeny_scalars(&isogeny::x0_pair(&int(5), 5).unwrap(), 256).unwrap();
    let sc = pair.scalars.as_ref().unwrap();
    assert_eq!(sc.a.to_string(), "2/91*sqrt(609)");
    assert_eq!(sc.a.mul(&sc.d), QuadNum::rational(int(2)));
    let m = pair.matrix.unwrap();
    assert_eq!((m.p, m.q, m.r, m.s), (1, 0, 0, 2));
}

#[test]
fn synthetic_p_inf() {
    let p = build_p_inf(&ArchData::synthetic(1, 0, 2, 1), Some(&ArchData::synthetic(3, 0, 1, 2))).unwrap();
    assert_eq!(p.to_string(), "-2*Y1*Z2 + 4*Z1*Y2 + 3*Y3*Z4 - Z3*Y4");
    assert!(isogeny::outside_diagonal_ideal(&p));
}
